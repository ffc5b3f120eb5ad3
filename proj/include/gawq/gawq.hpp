// gawq.hpp: umbrella header for the giant-atom waveguide-QED chain library.

#pragma once

#include "gawq/aah_oracle.hpp"
#include "gawq/analysis.hpp"
#include "gawq/chain_model.hpp"
#include "gawq/errors.hpp"
#include "gawq/modes.hpp"
#include "gawq/parallel.hpp"
#include "gawq/scattering.hpp"
#include "gawq/spectrum_grid.hpp"
#include "gawq/version.hpp"
