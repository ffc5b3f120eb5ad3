// modes.hpp: collective-mode (biorthogonal) decomposition of the effective
// Hamiltonian and the Lorentzian form of t and r built from it.
//
// With H UR_n = lambda_n UR_n, H^dagger UL_n = conj(lambda_n) UL_n and
// UL^dagger UR = 1:
//
//   t(Delta) = 1 - i sum_n (V^dagger UR_n)(UL_n^dagger V) / (Delta - lambda_n)
//   r(Delta) =   - i sum_n (V^T       UR_n)(UL_n^dagger V) / (Delta - lambda_n)
//
// which is the Lorentzian sum 1 + sum_n eta_n Gamma_n / (2 (Delta - center_n + i Gamma_n/2)).

#pragma once

#include "gawq/chain_model.hpp"
#include "gawq/parallel.hpp"
#include "gawq/spectrum_grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace gawq {

inline constexpr double kDefectiveCondition = 1e10;
inline constexpr double kZeroWidthFraction = 1e-14;

struct ModeSet {
    Eigen::VectorXcd lambda;
    Eigen::VectorXd centers;  // Re lambda
    Eigen::VectorXd widths;   // -2 Im lambda
    Eigen::VectorXcd eta;
    Eigen::VectorXcd xi;
    // eta_n * width_n and xi_n * width_n; finite even when a width vanishes.
    Eigen::VectorXcd eta_width;
    Eigen::VectorXcd xi_width;
    Eigen::MatrixXcd UR;
    Eigen::MatrixXcd UL;

    double eigenvector_condition{1.0};
    bool defective{false};
    // Modes with a vanishing width but a non-negligible photon overlap;
    // eta/xi are NaN there and only the *_width pairs are meaningful.
    std::vector<int> zero_width_modes;

    int size() const { return static_cast<int>(lambda.size()); }
    bool division_by_zero_width() const { return !zero_width_modes.empty(); }
};

namespace detail {

// Unit 2-norm, largest-modulus entry real and positive.
inline void normalize_column(Eigen::Ref<Eigen::VectorXcd> v) {
    const double norm = v.norm();
    if (norm == 0.0) return;
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const cd phase = std::abs(v(k)) > 0.0 ? std::conj(v(k)) / std::abs(v(k)) : cd{1.0, 0.0};
    v *= phase / norm;
}

}  // namespace detail

inline ModeSet decompose(const EffectiveModel& model) {
    const int n = model.size();
    if (n == 0) throw std::invalid_argument("decompose: empty model");

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(model.H, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("decompose: eigenvalue iteration did not converge");
    }
    const Eigen::VectorXcd& raw_lambda = solver.eigenvalues();
    const Eigen::MatrixXcd& raw_vectors = solver.eigenvectors();

    // Ascending center, ties by ascending width.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ca = raw_lambda(a).real(), cb = raw_lambda(b).real();
        if (ca != cb) return ca < cb;
        return -raw_lambda(a).imag() < -raw_lambda(b).imag();
    });

    ModeSet ms;
    ms.lambda.resize(n);
    ms.UR.resize(n, n);
    for (int k = 0; k < n; ++k) {
        ms.lambda(k) = raw_lambda(order[static_cast<std::size_t>(k)]);
        ms.UR.col(k) = raw_vectors.col(order[static_cast<std::size_t>(k)]);
        detail::normalize_column(ms.UR.col(k));
    }
    ms.centers = ms.lambda.real();
    ms.widths = -2.0 * ms.lambda.imag();

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ms.UR);
    const double rcond = lu.rcond();
    ms.eigenvector_condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    ms.defective = !(ms.eigenvector_condition <= kDefectiveCondition);
    ms.UL = lu.inverse().adjoint();

    // (V^dagger UR_n), (V^T UR_n), (UL_n^dagger V)
    const Eigen::VectorXcd left_t = ms.UR.transpose() * model.V.conjugate();
    const Eigen::VectorXcd left_r = ms.UR.transpose() * model.V;
    const Eigen::VectorXcd right = ms.UL.adjoint() * model.V;

    const double scale = model.rate_scale;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ms.eta.resize(n);
    ms.xi.resize(n);
    ms.eta_width.resize(n);
    ms.xi_width.resize(n);
    for (int k = 0; k < n; ++k) {
        const cd num_t = left_t(k) * right(k);
        const cd num_r = left_r(k) * right(k);
        ms.eta_width(k) = -2.0 * I * num_t;
        ms.xi_width(k) = -2.0 * I * num_r;
        const bool negligible = std::abs(num_t) <= kZeroWidthFraction * scale &&
                                std::abs(num_r) <= kZeroWidthFraction * scale;
        if (negligible) {
            ms.eta(k) = 0.0;
            ms.xi(k) = 0.0;
        } else if (std::abs(ms.widths(k)) < kZeroWidthFraction * scale) {
            ms.eta(k) = cd{nan, nan};
            ms.xi(k) = cd{nan, nan};
            ms.zero_width_modes.push_back(k);
        } else {
            ms.eta(k) = ms.eta_width(k) / ms.widths(k);
            ms.xi(k) = ms.xi_width(k) / ms.widths(k);
        }
    }
    return ms;
}

// Eigenvalues only (centers and widths, same ordering as decompose); UR, UL
// and the weights stay empty. Enough for width statistics at large N.
inline ModeSet mode_spectrum(const EffectiveModel& model) {
    const int n = model.size();
    if (n == 0) throw std::invalid_argument("mode_spectrum: empty model");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(model.H, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("mode_spectrum: eigenvalue iteration did not converge");
    }
    std::vector<cd> values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::stable_sort(values.begin(), values.end(), [](cd a, cd b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return -a.imag() < -b.imag();
    });
    ModeSet ms;
    ms.lambda = Eigen::Map<const Eigen::VectorXcd>(values.data(), n);
    ms.centers = ms.lambda.real();
    ms.widths = -2.0 * ms.lambda.imag();
    return ms;
}

// t and r at one detuning from the weight*width pairs (finite for every mode).
inline std::pair<cd, cd> lorentzian_amplitudes(const ModeSet& modes, double delta) {
    cd t{1.0, 0.0};
    cd r{0.0, 0.0};
    for (int k = 0; k < modes.size(); ++k) {
        const cd denom = 2.0 * (cd{delta - modes.centers(k), 0.5 * modes.widths(k)});
        t += modes.eta_width(k) / denom;
        r += modes.xi_width(k) / denom;
    }
    return {t, r};
}

inline SpectrumGrid lorentzian_spectrum(const ModeSet& modes, std::span<const double> grid,
                                        int threads = 1) {
    require_increasing(grid);
    SpectrumGrid out;
    out.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const auto [t, r] = lorentzian_amplitudes(modes, grid[i]);
        out.delta[i] = grid[i];
        out.t[i] = t;
        out.r[i] = r;
        out.T[i] = std::norm(t);
        out.R[i] = std::norm(r);
        out.path[i] = PointPath::lorentzian;
    });
    return out;
}

enum class Radiance { superradiant, subradiant };

struct Classification {
    std::vector<Radiance> labels;
    int superradiant{0};
    int subradiant{0};
};

// Superradiant iff width > gamma_eff (strict).
inline Classification classify(const ModeSet& modes, double gamma_eff) {
    Classification c;
    c.labels.reserve(static_cast<std::size_t>(modes.size()));
    for (int k = 0; k < modes.size(); ++k) {
        const bool sup = modes.widths(k) > gamma_eff;
        c.labels.push_back(sup ? Radiance::superradiant : Radiance::subradiant);
        (sup ? c.superradiant : c.subradiant) += 1;
    }
    return c;
}

}  // namespace gawq
