// scattering.hpp: single-photon transmission/reflection amplitudes.
//
// Two independent routes:
//  * amplitudes(): the resolvent form t = 1 - i V^dagger (Delta - H)^{-1} V,
//    r = -i V^T (Delta - H)^{-1} V, one dense LU per detuning;
//  * eom_oracle(): the piecewise-plane-wave real-space problem, solved as a
//    5N x 5N linear system in the field amplitudes between connection points
//    and the atomic amplitudes. It never forms H or V.

#pragma once

#include "gawq/chain_model.hpp"
#include "gawq/errors.hpp"
#include "gawq/modes.hpp"
#include "gawq/parallel.hpp"
#include "gawq/spectrum_grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gawq {

inline constexpr double kIllConditioned = 1e12;

struct Amplitudes {
    cd t;
    cd r;
};

inline Amplitudes amplitudes(const EffectiveModel& model, double delta) {
    Eigen::MatrixXcd A = -model.H;
    A.diagonal().array() += delta;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    // ||A^-1||_1 estimate times max(||A||_1, gamma): a 1x1 or uniformly tiny
    // A is still flagged when it is singular on the scale of the rates.
    const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
    const double rcond = norm > 0.0 ? lu.rcond() : 0.0;
    const double cond = rcond > 0.0 ? std::max(norm, model.rate_scale) / (rcond * norm)
                                    : std::numeric_limits<double>::infinity();
    if (!(cond < kIllConditioned)) {
        throw IllConditioned("amplitudes: Delta*I - H is ill-conditioned at Delta = " +
                                 std::to_string(delta),
                             cond);
    }
    const Eigen::VectorXcd x = lu.solve(model.V);
    const cd overlap = model.V.dot(x);  // conjugates V
    const cd bilinear = (model.V.array() * x.array()).sum();
    return {1.0 - I * overlap, -I * bilinear};
}

// Grid evaluation. Ill-conditioned points fall back to the modes path when
// the decomposition is usable; otherwise the point is marked failed.
inline SpectrumGrid spectrum(const EffectiveModel& model, std::span<const double> grid,
                             int threads = 1) {
    require_increasing(grid);
    SpectrumGrid out;
    out.resize(grid.size());

    std::once_flag modes_once;
    std::optional<ModeSet> modes;
    auto fallback = [&]() -> const ModeSet* {
        std::call_once(modes_once, [&] {
            try {
                modes = decompose(model);
            } catch (const std::exception&) {
            }
        });
        return (modes && !modes->defective) ? &*modes : nullptr;
    };

    parallel_for(grid.size(), threads, [&](std::size_t i) {
        out.delta[i] = grid[i];
        try {
            const auto a = amplitudes(model, grid[i]);
            out.t[i] = a.t;
            out.r[i] = a.r;
            out.path[i] = PointPath::direct;
        } catch (const IllConditioned&) {
            if (const ModeSet* ms = fallback()) {
                const auto [t, r] = lorentzian_amplitudes(*ms, grid[i]);
                out.t[i] = t;
                out.r[i] = r;
                out.path[i] = PointPath::fallback;
            } else {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                out.t[i] = cd{nan, nan};
                out.r[i] = cd{nan, nan};
                out.path[i] = PointPath::failed;
            }
        }
        out.T[i] = std::norm(out.t[i]);
        out.R[i] = std::norm(out.r[i]);
    });
    return out;
}

// --------------------------- real-space EoM oracle ----------------------------

struct OracleSolution {
    cd t;
    cd r;
    Eigen::VectorXcd f;   // atomic amplitudes
    Eigen::VectorXcd tp;  // right-moving amplitude right of point p (p = 1..2N)
    Eigen::VectorXcd rp;  // left-moving amplitude left of point p (p = 1..2N)
};

inline constexpr double kCoincidentPhase = 1e-9;

// Unknown ordering: t_1..t_2N, r_1..r_2N, f_1..f_N. Field values at a
// connection point are the mean of the left and right limits.
inline OracleSolution eom_oracle(const CouplingGeometry& geometry, LegRates rates,
                                 const Eigen::VectorXd& onsite, double gamma0, double delta) {
    const int n = geometry.atoms();
    if (onsite.size() != n) throw std::invalid_argument("eom_oracle: onsite size mismatch");

    struct Point {
        double theta;
        int atom;
        int leg;
    };
    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < 2; ++m) points.push_back({geometry.theta(i, m), i, m});
    }
    std::sort(points.begin(), points.end(),
              [](const Point& a, const Point& b) { return a.theta < b.theta; });
    for (std::size_t p = 1; p < points.size(); ++p) {
        if (points[p].theta - points[p - 1].theta < kCoincidentPhase) {
            throw CoincidentPoints("eom_oracle: connection points of atoms " +
                                   std::to_string(points[p - 1].atom + 1) + " and " +
                                   std::to_string(points[p].atom + 1) + " coincide");
        }
    }

    const int P = 2 * n;
    const int size = 5 * n;
    auto t_idx = [](int p) { return p - 1; };
    auto r_idx = [P](int p) { return P + p - 1; };
    auto f_idx = [P](int i) { return 2 * P + i; };
    const double amp[2] = {std::sqrt(rates.gamma1 / 2.0), std::sqrt(rates.gamma2 / 2.0)};

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(size, size);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(size);

    // Field jumps: t_p = t_{p-1} - i g f e^{-i theta}, r_p = r_{p+1} - i g f e^{+i theta}.
    for (int p = 1; p <= P; ++p) {
        const Point& pt = points[static_cast<std::size_t>(p - 1)];
        const double g = amp[pt.leg];
        const int row_t = 2 * (p - 1);
        const int row_r = row_t + 1;
        A(row_t, t_idx(p)) = 1.0;
        if (p > 1) {
            A(row_t, t_idx(p - 1)) = -1.0;
        } else {
            b(row_t) = 1.0;  // t_0 = 1
        }
        A(row_t, f_idx(pt.atom)) += I * g * std::polar(1.0, -pt.theta);

        A(row_r, r_idx(p)) = 1.0;
        if (p < P) A(row_r, r_idx(p + 1)) = -1.0;  // r_{2N+1} = 0
        A(row_r, f_idx(pt.atom)) += I * g * std::polar(1.0, pt.theta);
    }

    // Atoms: (omega_i - omega - i gamma0/2) f_i + sum_m g_m [Phi_R + Phi_L](x_im) = 0.
    const int atom_row0 = 2 * P;
    for (int i = 0; i < n; ++i) {
        A(atom_row0 + i, f_idx(i)) = cd{onsite(i) - delta, -0.5 * gamma0};
    }
    for (int p = 1; p <= P; ++p) {
        const Point& pt = points[static_cast<std::size_t>(p - 1)];
        const int row = atom_row0 + pt.atom;
        const cd right = 0.5 * amp[pt.leg] * std::polar(1.0, pt.theta);
        const cd left = 0.5 * amp[pt.leg] * std::polar(1.0, -pt.theta);
        A(row, t_idx(p)) += right;
        if (p > 1) {
            A(row, t_idx(p - 1)) += right;
        } else {
            b(row) -= right;
        }
        A(row, r_idx(p)) += left;
        if (p < P) A(row, r_idx(p + 1)) += left;
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) throw SingularSystem("eom_oracle: real-space system is singular");
    const Eigen::VectorXcd x = lu.solve(b);
    if (!x.allFinite()) throw SingularSystem("eom_oracle: non-finite solution");

    OracleSolution sol;
    sol.tp = x.segment(0, P);
    sol.rp = x.segment(P, P);
    sol.f = x.segment(2 * P, n);
    sol.t = sol.tp(P - 1);
    sol.r = sol.rp(0);
    return sol;
}

inline OracleSolution eom_oracle(const ChainConfig& cfg, double delta) {
    const auto geometry = build_geometry(cfg);
    return eom_oracle(geometry, {cfg.gamma1, cfg.gamma2}, onsite_detunings(cfg), cfg.gamma0,
                      delta);
}

}  // namespace gawq
