// analysis.hpp: localization diagnostics on mode widths, transmission-dip
// extraction, band counting and butterfly/localization sweeps.

#pragma once

#include "gawq/aah_oracle.hpp"
#include "gawq/chain_model.hpp"
#include "gawq/modes.hpp"
#include "gawq/parallel.hpp"
#include "gawq/scattering.hpp"
#include "gawq/spectrum_grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gawq {

// ------------------------------ width statistics ------------------------------

// (1/N) sum_n (width_n - ref)^2
inline double decay_variance(const ModeSet& modes, double gamma_ref) {
    const int n = modes.size();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double d = modes.widths(k) - gamma_ref;
        acc += d * d;
    }
    return acc / n;
}

// sum_n (width_n / (N ref))^2: participation of the modes in the decay.
inline double ipr_decay(const ModeSet& modes, double gamma_ref) {
    const int n = modes.size();
    const double total = n * gamma_ref;
    if (!(total > 0.0)) throw std::invalid_argument("ipr_decay: N * gamma_ref must be positive");
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = modes.widths(k) / total;
        acc += w * w;
    }
    return acc;
}

struct LossMetrics {
    double sigma2{0.0};
    double ipr_decay{0.0};
};

// For a ModeSet whose widths already contain gamma0; reference width is
// gamma_eff + gamma0.
inline LossMetrics loss_corrected_metrics(const ModeSet& lossy_modes, double gamma_eff,
                                          double gamma0) {
    const double ref = gamma_eff + gamma0;
    return {decay_variance(lossy_modes, ref), ipr_decay(lossy_modes, ref)};
}

// Relative mismatch |sigma2 - N ref^2 IPR_decay| / sigma2 of the large-N relation.
inline double thermodynamic_mismatch(double sigma2, double ipr, int n, double gamma_ref) {
    return std::abs(sigma2 - n * gamma_ref * gamma_ref * ipr) / sigma2;
}

struct LocalizationReport {
    double v0{0.0};
    double gamma_ref{0.0};  // gamma_eff (lossless reference width)
    double sigma2{0.0};
    double ipr_decay{0.0};
    double aah_ground_ipr{0.0};
    std::optional<double> sigma2_lossy;
    std::optional<double> ipr_decay_lossy;
};

inline LocalizationReport localization_report(const ChainConfig& cfg) {
    const auto d = derive_couplings(cfg);
    ChainConfig lossless = cfg;
    lossless.gamma0 = 0.0;

    LocalizationReport rep;
    rep.v0 = cfg.v0;
    rep.gamma_ref = d.gamma_eff;
    const auto modes = mode_spectrum(build_effective_model(lossless));
    rep.sigma2 = decay_variance(modes, d.gamma_eff);
    rep.ipr_decay = ipr_decay(modes, d.gamma_eff);

    const auto eig = eigensystem(build_aah_matrix(cfg));
    rep.aah_ground_ipr = ipr(eig.states.col(0));

    if (cfg.gamma0 > 0.0) {
        const auto lossy = mode_spectrum(build_effective_model(cfg));
        const auto m = loss_corrected_metrics(lossy, d.gamma_eff, cfg.gamma0);
        rep.sigma2_lossy = m.sigma2;
        rep.ipr_decay_lossy = m.ipr_decay;
    }
    return rep;
}

// One report per V0 value (absolute rate units), index-ordered.
inline std::vector<LocalizationReport> localization_sweep(const ChainConfig& base,
                                                          std::span<const double> v0_values,
                                                          int threads = 1) {
    std::vector<LocalizationReport> out(v0_values.size());
    parallel_for(v0_values.size(), threads, [&](std::size_t i) {
        ChainConfig cfg = base;
        cfg.v0 = v0_values[i];
        out[i] = localization_report(cfg);
    });
    return out;
}

// --------------------------------- dip finder ---------------------------------

struct Dip {
    double center{0.0};
    double width{0.0};
    double depth{0.0};  // 1 - T at the minimum
};

struct DipTable {
    std::vector<Dip> dips;

    std::size_t size() const { return dips.size(); }
    bool empty() const { return dips.empty(); }
    std::vector<double> centers() const {
        std::vector<double> c;
        c.reserve(dips.size());
        for (const auto& d : dips) c.push_back(d.center);
        return c;
    }
};

inline constexpr double kDefaultDipThreshold = 0.995;

namespace detail {

// Position where T climbs back to `level`, walking from k in direction dir.
// Stops at a local maximum (neighbouring resonance) or the grid edge.
inline std::optional<double> half_depth_crossing(const SpectrumGrid& g, std::size_t k, int dir,
                                                 double level) {
    const auto n = static_cast<std::ptrdiff_t>(g.size());
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(k);
    while (true) {
        const std::ptrdiff_t next = j + dir;
        if (next < 0 || next >= n) return std::nullopt;
        if (g.T[static_cast<std::size_t>(next)] >= level) {
            const double t0 = g.T[static_cast<std::size_t>(j)];
            const double t1 = g.T[static_cast<std::size_t>(next)];
            const double x0 = g.delta[static_cast<std::size_t>(j)];
            const double x1 = g.delta[static_cast<std::size_t>(next)];
            const double frac = t1 != t0 ? (level - t0) / (t1 - t0) : 0.0;
            return x0 + frac * (x1 - x0);
        }
        if (g.T[static_cast<std::size_t>(next)] < g.T[static_cast<std::size_t>(j)]) {
            return g.delta[static_cast<std::size_t>(j)];  // passed a local maximum
        }
        j = next;
    }
}

}  // namespace detail

// Local minima of T below threshold, center refined by a 3-point parabola,
// width measured at half depth. Each resonance must span >= 3 grid points.
inline DipTable find_dips(const SpectrumGrid& grid, double threshold = kDefaultDipThreshold) {
    DipTable table;
    const std::size_t n = grid.size();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double y0 = grid.T[k - 1], y1 = grid.T[k], y2 = grid.T[k + 1];
        if (!(y1 < threshold && y1 < y0 && y1 <= y2)) continue;

        const double h = grid.delta[k + 1] - grid.delta[k];
        const double h_left = grid.delta[k] - grid.delta[k - 1];
        const double curvature = y0 - 2.0 * y1 + y2;
        double offset = 0.0;
        double t_min = y1;
        if (curvature > 0.0) {
            offset = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
            t_min = std::clamp(y1 - 0.25 * (y0 - y2) * offset, 0.0, y1);
        }
        const double center = grid.delta[k] + offset * (offset < 0.0 ? h_left : h);
        const double depth = std::clamp(1.0 - t_min, std::numeric_limits<double>::min(), 1.0);
        const double level = 1.0 - 0.5 * depth;

        const auto left = detail::half_depth_crossing(grid, k, -1, level);
        const auto right = detail::half_depth_crossing(grid, k, +1, level);
        double width = 0.0;
        if (left && right) {
            width = *right - *left;
        } else if (left) {
            width = 2.0 * (center - *left);
        } else if (right) {
            width = 2.0 * (*right - center);
        }
        if (!table.dips.empty() && !(center > table.dips.back().center)) continue;
        table.dips.push_back({center, std::max(width, 0.0), depth});
    }
    return table;
}

struct BandCount {
    int bands{0};
    std::vector<double> edge_dips;  // isolated in-gap dips, excluded from the count
};

inline BandCount band_count(const DipTable& dips, double gap_factor = 3.0) {
    BandCount bc;
    if (dips.empty()) return bc;
    const auto centers = dips.centers();
    const auto clusters = cluster_levels(centers, gap_factor);
    bc.bands = static_cast<int>(clusters.bands.size());
    bc.edge_dips = clusters.isolated;
    return bc;
}

// Default detuning window: the AAH spectral support plus two effective widths.
inline std::pair<double, double> default_window(const ChainConfig& cfg) {
    const auto d = derive_couplings(cfg);
    const double half = 2.0 * std::abs(d.J) + cfg.v0 + 2.0 * d.gamma_eff;
    return {-half, half};
}

// --------------------------------- butterfly ----------------------------------

struct ButterflyMap {
    std::vector<BetaSpec> betas;
    std::vector<double> delta;
    Eigen::MatrixXd T;             // rows: beta, cols: delta
    std::vector<bool> row_valid;
    std::vector<std::string> row_error;
    std::vector<double> spot_deviation;  // max |t_modes - t_direct| over spot checks, per row

    std::size_t invalid_rows() const {
        return static_cast<std::size_t>(std::count(row_valid.begin(), row_valid.end(), false));
    }
};

inline constexpr double kSpotCheckTolerance = 1e-8;

// beta_k = k / (count + 1), k = 1..count, stored as reduced rationals.
inline std::vector<BetaSpec> butterfly_betas(int count) {
    std::vector<BetaSpec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) {
        const int g = std::gcd(k, count + 1);
        out.push_back(Rational{k / g, (count + 1) / g});
    }
    return out;
}

// Transmission rows through the modes fast path; every `spot_every`-th point
// is re-evaluated with the direct solve. A failed row is recorded, not fatal.
inline ButterflyMap butterfly_assemble(const ChainConfig& tmpl, int beta_count,
                                       std::span<const double> grid, int threads = 1,
                                       int spot_every = 32) {
    require_increasing(grid);
    if (beta_count < 1) throw std::invalid_argument("butterfly_assemble: beta_count must be >= 1");
    ButterflyMap map;
    map.betas = butterfly_betas(beta_count);
    map.delta.assign(grid.begin(), grid.end());
    const auto rows = static_cast<Eigen::Index>(beta_count);
    const auto cols = static_cast<Eigen::Index>(grid.size());
    map.T = Eigen::MatrixXd::Constant(rows, cols, std::numeric_limits<double>::quiet_NaN());
    map.row_valid.assign(static_cast<std::size_t>(beta_count), true);
    map.row_error.assign(static_cast<std::size_t>(beta_count), std::string{});
    map.spot_deviation.assign(static_cast<std::size_t>(beta_count), 0.0);

    parallel_for(static_cast<std::size_t>(beta_count), threads, [&](std::size_t row) {
        try {
            ChainConfig cfg = tmpl;
            cfg.beta = map.betas[row];
            const auto model = build_effective_model(cfg);
            const auto modes = decompose(model);
            SpectrumGrid sg = modes.defective ? spectrum(model, grid) : lorentzian_spectrum(modes, grid);
            double dev = 0.0;
            if (!modes.defective && spot_every > 0) {
                for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(spot_every)) {
                    try {
                        const auto a = amplitudes(model, grid[i]);
                        dev = std::max(dev, std::abs(a.t - sg.t[i]));
                    } catch (const IllConditioned&) {
                    }
                }
            }
            map.spot_deviation[row] = dev;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                map.T(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = sg.T[i];
            }
            if (dev > kSpotCheckTolerance) {
                map.row_valid[row] = false;
                map.row_error[row] = "spot check deviation " + std::to_string(dev);
            } else if (sg.count(PointPath::failed) > 0) {
                map.row_valid[row] = false;
                map.row_error[row] = "unevaluable grid points";
            }
        } catch (const std::exception& e) {
            map.row_valid[row] = false;
            map.row_error[row] = e.what();
        }
    });
    return map;
}

// ------------------------ dip / eigenvalue correspondence ----------------------

// Number of reference levels E_n with a dip within max(width_n, step);
// modes and levels are paired in sorted order.
inline int levels_with_dip(const DipTable& dips, const ModeSet& modes,
                           const Eigen::VectorXd& levels, double step) {
    int covered = 0;
    for (Eigen::Index k = 0; k < levels.size(); ++k) {
        const double tol = std::max(k < modes.size() ? modes.widths(k) : 0.0, step);
        for (const auto& d : dips.dips) {
            if (std::abs(d.center - levels(k)) <= tol) {
                ++covered;
                break;
            }
        }
    }
    return covered;
}

// Number of dips whose center lies within max(width, step) of its nearest mode center.
inline int dips_near_modes(const DipTable& dips, const ModeSet& modes, double step) {
    int ok = 0;
    for (const auto& d : dips.dips) {
        double best = std::numeric_limits<double>::infinity();
        int nearest = -1;
        for (int k = 0; k < modes.size(); ++k) {
            const double dist = std::abs(d.center - modes.centers(k));
            if (dist < best) {
                best = dist;
                nearest = k;
            }
        }
        if (nearest >= 0 && best <= std::max(modes.widths(nearest), step)) ++ok;
    }
    return ok;
}

}  // namespace gawq
