// aah_oracle.hpp: exact diagonalisation of the target AAH chain and the
// comparison of collective-mode centers against its levels.

#pragma once

#include "gawq/chain_model.hpp"
#include "gawq/errors.hpp"
#include "gawq/modes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gawq {

struct AahEigensystem {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd states;    // column n is the normalised eigenstate n

    int size() const { return static_cast<int>(energies.size()); }
};

inline AahEigensystem eigensystem(const AahMatrix& m) {
    const int n = m.size();
    if (n == 0) throw std::invalid_argument("eigensystem: empty matrix");
    if (m.off_diagonal.size() != std::max(n - 1, 0)) {
        throw std::invalid_argument("eigensystem: off-diagonal must have N-1 entries");
    }
    AahEigensystem es;
    if (n == 1) {
        es.energies = m.diagonal;
        es.states = Eigen::MatrixXd::Ones(1, 1);
        return es;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(m.diagonal, m.off_diagonal, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigensystem: tridiagonal QL iteration did not converge");
    }
    es.energies = solver.eigenvalues();
    es.states = solver.eigenvectors();
    // Sign convention: largest-modulus component positive.
    for (int k = 0; k < n; ++k) {
        Eigen::Index i = 0;
        es.states.col(k).cwiseAbs().maxCoeff(&i);
        if (es.states(i, k) < 0.0) es.states.col(k) *= -1.0;
    }
    return es;
}

// Inverse participation ratio sum |psi_m|^4 of a normalised state.
inline double ipr(const Eigen::Ref<const Eigen::VectorXd>& state) {
    const double norm2 = state.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-8) {
        throw NotNormalized("ipr: state norm^2 = " + std::to_string(norm2));
    }
    return state.array().square().square().sum();
}

// ------------------------------ level clustering ------------------------------

struct LevelClusters {
    std::vector<std::pair<double, double>> bands;  // [lo, hi] of clusters with >= 2 levels
    std::vector<double> isolated;                  // singleton levels (edge/in-gap)
    double median_spacing{0.0};
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// Splits sorted levels wherever a spacing exceeds gap_factor * median spacing.
// With no multi-level cluster at all, every cluster counts as a band.
inline LevelClusters cluster_levels(std::span<const double> sorted, double gap_factor = 3.0) {
    LevelClusters out;
    if (sorted.empty()) return out;
    std::vector<double> spacing;
    for (std::size_t i = 1; i < sorted.size(); ++i) spacing.push_back(sorted[i] - sorted[i - 1]);
    out.median_spacing = median(spacing);

    std::vector<std::vector<double>> clusters{{sorted[0]}};
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (spacing[i - 1] > gap_factor * out.median_spacing) clusters.emplace_back();
        clusters.back().push_back(sorted[i]);
    }
    const bool any_multi = std::any_of(clusters.begin(), clusters.end(),
                                       [](const auto& c) { return c.size() > 1; });
    for (const auto& c : clusters) {
        if (c.size() > 1 || !any_multi) {
            out.bands.emplace_back(c.front(), c.back());
        } else {
            out.isolated.push_back(c.front());
        }
    }
    return out;
}

// Flags centers lying farther than gap_factor * (median level spacing) from
// every band interval of the reference (AAH) spectrum.
inline std::vector<bool> in_gap_mask(const Eigen::VectorXd& centers,
                                     const Eigen::VectorXd& reference_levels,
                                     double gap_factor = 3.0) {
    std::vector<double> ref(reference_levels.data(),
                            reference_levels.data() + reference_levels.size());
    std::sort(ref.begin(), ref.end());
    const auto clusters = cluster_levels(ref, gap_factor);
    const double limit = gap_factor * clusters.median_spacing;
    std::vector<bool> mask(static_cast<std::size_t>(centers.size()), false);
    for (Eigen::Index k = 0; k < centers.size(); ++k) {
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& [lo, hi] : clusters.bands) {
            const double d = centers(k) < lo ? lo - centers(k) : (centers(k) > hi ? centers(k) - hi : 0.0);
            dist = std::min(dist, d);
        }
        mask[static_cast<std::size_t>(k)] = dist > limit;
    }
    return mask;
}

// ------------------------------- mode matching --------------------------------

struct MatchReport {
    std::vector<std::pair<int, int>> pairs;  // (mode index, eigenstate index)
    double max_center_deviation{0.0};        // in units of J
    double mean_center_deviation{0.0};       // in units of J
    bool reliable{true};  // false when a deviation exceeds half the smallest level spacing
};

// Sorted-order pairing; both inputs are ascending so pairs are (k, k).
inline MatchReport match_modes(const ModeSet& modes, const AahEigensystem& eig, double J) {
    if (modes.size() != eig.size()) {
        throw CountMismatch("match_modes: " + std::to_string(modes.size()) + " modes vs " +
                            std::to_string(eig.size()) + " levels");
    }
    const int n = modes.size();
    const double unit = J != 0.0 ? std::abs(J) : 1.0;
    double min_spacing = std::numeric_limits<double>::infinity();
    for (int k = 1; k < n; ++k) min_spacing = std::min(min_spacing, eig.energies(k) - eig.energies(k - 1));

    MatchReport rep;
    double sum = 0.0;
    double max_abs = 0.0;
    for (int k = 0; k < n; ++k) {
        rep.pairs.emplace_back(k, k);
        const double d = std::abs(modes.centers(k) - eig.energies(k));
        max_abs = std::max(max_abs, d);
        sum += d;
    }
    rep.max_center_deviation = max_abs / unit;
    rep.mean_center_deviation = sum / n / unit;
    rep.reliable = !(max_abs > 0.5 * min_spacing);
    return rep;
}

}  // namespace gawq
