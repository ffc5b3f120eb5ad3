// spectrum_grid.hpp: sampled scattering amplitudes on a detuning grid.

#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gawq {

// How a grid point was evaluated.
enum class PointPath {
    direct,      // one dense solve of (Delta I - H) x = V
    lorentzian,  // sum over collective modes
    fallback,    // direct solve was ill-conditioned, modes path used instead
    failed,      // no path produced a trustworthy value (amplitudes are NaN)
};

struct SpectrumGrid {
    std::vector<double> delta;
    std::vector<std::complex<double>> t;
    std::vector<std::complex<double>> r;
    std::vector<double> T;
    std::vector<double> R;
    std::vector<PointPath> path;

    std::size_t size() const { return delta.size(); }

    void resize(std::size_t n) {
        delta.resize(n);
        t.resize(n);
        r.resize(n);
        T.resize(n);
        R.resize(n);
        path.resize(n, PointPath::direct);
    }

    std::size_t count(PointPath p) const {
        return static_cast<std::size_t>(std::count(path.begin(), path.end(), p));
    }

    double step() const { return delta.size() > 1 ? delta[1] - delta[0] : 0.0; }
};

inline void require_increasing(std::span<const double> grid) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("detuning grid must be strictly increasing");
        }
    }
}

// n points uniformly covering [lo, hi] (inclusive).
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: need n >= 2 and hi > lo");
    std::vector<double> g(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

}  // namespace gawq
