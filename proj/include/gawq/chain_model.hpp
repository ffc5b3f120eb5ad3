// chain_model.hpp: configuration, derived couplings, geometry and the
// effective (non-Hermitian) Hamiltonian of a braided giant-atom chain.
//
// Rates are plain doubles in whatever unit the caller picked for gamma;
// the sample configs all use gamma = (gamma1 + gamma2) / 2 = 1.
// Frequencies are taken in the frame rotating at the bare atomic frequency,
// so omega_a itself never enters H (it only appears in markov_validity).

#pragma once

#include "gawq/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gawq {

using cd = std::complex<double>;
inline constexpr cd I{0.0, 1.0};

// ------------------------------- modulation beta -----------------------------

struct Rational {
    int p{0};
    int q{1};
};

struct RealBeta {
    double value{0.0};
};

// (sqrt(5) - 1) / 2, kept as a token so sweeps are reproducible bit-for-bit.
struct GoldenInverse {};

using BetaSpec = std::variant<Rational, RealBeta, GoldenInverse>;

inline constexpr double kGoldenInverse = 0.6180339887498949;

inline double beta_value(const BetaSpec& beta) {
    struct Visitor {
        double operator()(const Rational& r) const {
            return static_cast<double>(r.p) / static_cast<double>(r.q);
        }
        double operator()(const RealBeta& r) const { return r.value; }
        double operator()(const GoldenInverse&) const { return kGoldenInverse; }
    };
    return std::visit(Visitor{}, beta);
}

inline std::string beta_to_string(const BetaSpec& beta) {
    struct Visitor {
        std::string operator()(const Rational& r) const {
            return std::to_string(r.p) + "/" + std::to_string(r.q);
        }
        std::string operator()(const RealBeta& r) const {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", r.value);
            return buf;
        }
        std::string operator()(const GoldenInverse&) const { return "golden"; }
    };
    return std::visit(Visitor{}, beta);
}

// Throws ConfigError for q <= 0, non-coprime pairs or p/q outside [0, 1].
inline void validate_beta(const BetaSpec& beta) {
    if (const auto* r = std::get_if<Rational>(&beta)) {
        if (r->q <= 0) throw ConfigError("beta: denominator must be positive");
        if (r->p < 0 || r->p > r->q) throw ConfigError("beta: p/q must lie in [0, 1]");
        if (std::gcd(r->p, r->q) != 1) {
            throw ConfigError("beta: " + std::to_string(r->p) + "/" + std::to_string(r->q) +
                              " is not in lowest terms (p and q must be coprime)");
        }
    } else if (const auto* v = std::get_if<RealBeta>(&beta)) {
        if (!std::isfinite(v->value)) throw ConfigError("beta: value must be finite");
    }
}

// ---------------------------------- config -----------------------------------

struct ChainConfig {
    int n{1};                   // number of giant atoms
    double gamma1{1.0};         // decay rate through the first connection point
    double gamma2{1.0};         // ... and through the second
    double zeta{1.0};           // phi' / phi, fixed in hardware
    int winding{1};             // phi + phi' = (2 winding - 1) pi
    double v0{0.0};             // modulation amplitude
    BetaSpec beta{Rational{0, 1}};
    double varphi{0.0};         // modulation phase (not the delay phase)
    double gamma0{0.0};         // loss into non-waveguide channels
    std::optional<double> omega_ratio;  // omega_a / gamma, Markov check only
};

// Throws ConfigError on hard violations; returns human-readable warnings otherwise.
inline std::vector<std::string> validate(const ChainConfig& cfg) {
    std::vector<std::string> warnings;
    if (cfg.n < 1) throw ConfigError("n: chain needs at least one atom");
    if (!(cfg.gamma1 >= 0.0) || !(cfg.gamma2 >= 0.0)) {
        throw ConfigError("gamma1/gamma2: decay rates must be non-negative");
    }
    if (!(cfg.gamma1 + cfg.gamma2 > 0.0)) throw ConfigError("gamma1 + gamma2 must be positive");
    if (!(cfg.zeta > 0.0) || !std::isfinite(cfg.zeta)) throw ConfigError("zeta: must be positive");
    if (cfg.winding < 1) throw ConfigError("winding: must be a positive integer");
    if (!(cfg.v0 >= 0.0) || !std::isfinite(cfg.v0)) throw ConfigError("v0: must be non-negative");
    if (!std::isfinite(cfg.varphi)) throw ConfigError("varphi: must be finite");
    if (!(cfg.gamma0 >= 0.0) || !std::isfinite(cfg.gamma0)) {
        throw ConfigError("gamma0: loss rate must be non-negative");
    }
    if (cfg.omega_ratio && !(*cfg.omega_ratio > 0.0)) {
        throw ConfigError("omega_ratio: must be positive");
    }
    validate_beta(cfg.beta);
    if (cfg.zeta < 1.0) {
        warnings.emplace_back("zeta < 1 gives phi > phi'; braided ordering phi <= phi' is not met");
    }
    return warnings;
}

// ----------------------------- derived couplings -----------------------------

struct DerivedCouplings {
    double gamma_mean{0.0};  // (gamma1 + gamma2) / 2
    double delta{0.0};       // (gamma2 - gamma1) / 2
    double phi{0.0};         // delay phase between theta_{i+1,1} and theta_{i,2}
    double phi_prime{0.0};   // zeta * phi
    double J{0.0};           // nearest-neighbour exchange gamma sin(phi)
    double gamma_eff{0.0};   // single-atom effective decay
};

// Single-atom effective decay 2 (gamma - sqrt(gamma^2 - delta^2)), written in
// the cancellation-free form 2 delta^2 / (gamma + sqrt(gamma^2 - delta^2)).
inline double effective_decay(double gamma_mean, double delta) {
    const double root = std::sqrt((gamma_mean - delta) * (gamma_mean + delta));
    return 2.0 * delta * delta / (gamma_mean + root);
}

inline DerivedCouplings derive_couplings(const ChainConfig& cfg) {
    if (cfg.gamma1 < 0.0 || cfg.gamma2 < 0.0) {
        throw ConfigError("derive_couplings: negative decay rate");
    }
    if (!(cfg.zeta > 0.0) || cfg.winding < 1) {
        throw ConfigError("derive_couplings: zeta must be positive and winding >= 1");
    }
    DerivedCouplings d;
    d.gamma_mean = 0.5 * (cfg.gamma1 + cfg.gamma2);
    d.delta = 0.5 * (cfg.gamma2 - cfg.gamma1);
    d.phi = (2.0 * cfg.winding - 1.0) * std::numbers::pi / (cfg.zeta + 1.0);
    d.phi_prime = cfg.zeta * d.phi;
    d.J = d.gamma_mean * std::sin(d.phi);
    d.gamma_eff = effective_decay(d.gamma_mean, d.delta);
    return d;
}

// --------------------------------- geometry ----------------------------------

// theta(i, m): accumulated phase k_a x_{im} of leg m of atom i (0-based here).
struct CouplingGeometry {
    Eigen::MatrixX2d theta;

    int atoms() const { return static_cast<int>(theta.rows()); }
};

inline CouplingGeometry build_geometry(const ChainConfig& cfg) {
    validate(cfg);
    const auto d = derive_couplings(cfg);
    if (!std::isfinite(d.phi) || !std::isfinite(d.phi_prime)) {
        throw ConfigError("build_geometry: delay phases are not finite");
    }
    CouplingGeometry g;
    g.theta.resize(cfg.n, 2);
    for (int i = 0; i < cfg.n; ++i) {
        g.theta(i, 0) = i * d.phi_prime;
        g.theta(i, 1) = i * d.phi_prime + d.phi + d.phi_prime;
    }
    return g;
}

// Chain reversal: atom order reversed and positions mirrored (theta -> -theta).
inline CouplingGeometry mirrored(const CouplingGeometry& g) {
    const int n = g.atoms();
    CouplingGeometry out;
    out.theta.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        out.theta(i, 0) = -g.theta(n - 1 - i, 0);
        out.theta(i, 1) = -g.theta(n - 1 - i, 1);
    }
    return out;
}

// --------------------------------- H and V -----------------------------------

struct LegRates {
    double gamma1{1.0};
    double gamma2{1.0};
};

struct EffectiveModel {
    Eigen::MatrixXcd H;
    Eigen::VectorXcd V;
    bool loss_included{false};
    double rate_scale{1.0};  // gamma = (gamma1 + gamma2) / 2, used for relative thresholds

    int size() const { return static_cast<int>(H.rows()); }
};

// V0 cos(2 pi beta i + varphi) for i = 1..N.
inline Eigen::VectorXd onsite_detunings(const ChainConfig& cfg) {
    const double beta = beta_value(cfg.beta);
    Eigen::VectorXd out(cfg.n);
    for (int i = 1; i <= cfg.n; ++i) {
        out(i - 1) = cfg.v0 * std::cos(2.0 * std::numbers::pi * beta * i + cfg.varphi);
    }
    return out;
}

inline EffectiveModel build_effective_model(const CouplingGeometry& geometry, LegRates rates,
                                            const Eigen::VectorXd& onsite, double gamma0) {
    const int n = geometry.atoms();
    if (onsite.size() != n) {
        throw std::invalid_argument("build_effective_model: onsite size does not match geometry");
    }
    if (rates.gamma1 < 0.0 || rates.gamma2 < 0.0) {
        throw ConfigError("build_effective_model: negative decay rate");
    }
    const double g[2] = {rates.gamma1, rates.gamma2};
    const double amp[2] = {std::sqrt(rates.gamma1 / 2.0), std::sqrt(rates.gamma2 / 2.0)};

    EffectiveModel model;
    model.H.resize(n, n);
    model.V.resize(n);
    model.loss_included = gamma0 > 0.0;
    model.rate_scale = 0.5 * (rates.gamma1 + rates.gamma2);

    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            cd sum{0.0, 0.0};
            for (int m = 0; m < 2; ++m) {
                for (int mp = 0; mp < 2; ++mp) {
                    const double phase = std::abs(geometry.theta(i, m) - geometry.theta(j, mp));
                    sum += std::sqrt(g[m] * g[mp]) * std::polar(1.0, phase);
                }
            }
            const cd h = -0.5 * I * sum;
            model.H(i, j) = h;
            model.H(j, i) = h;
        }
        model.H(i, i) += cd{onsite(i), -0.5 * gamma0};
        model.V(i) = amp[0] * std::polar(1.0, geometry.theta(i, 0)) +
                     amp[1] * std::polar(1.0, geometry.theta(i, 1));
    }
    return model;
}

inline EffectiveModel build_effective_model(const ChainConfig& cfg) {
    const auto geometry = build_geometry(cfg);
    return build_effective_model(geometry, {cfg.gamma1, cfg.gamma2}, onsite_detunings(cfg),
                                 cfg.gamma0);
}

// ------------------------------ target AAH model ------------------------------

struct AahMatrix {
    Eigen::VectorXd diagonal;      // V0 cos(2 pi beta i + varphi)
    Eigen::VectorXd off_diagonal;  // J, length N-1

    int size() const { return static_cast<int>(diagonal.size()); }

    Eigen::MatrixXd dense() const {
        const int n = size();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        m.diagonal() = diagonal;
        for (int i = 0; i + 1 < n; ++i) {
            m(i, i + 1) = off_diagonal(i);
            m(i + 1, i) = off_diagonal(i);
        }
        return m;
    }
};

inline AahMatrix build_aah_matrix(const ChainConfig& cfg) {
    validate(cfg);
    const auto d = derive_couplings(cfg);
    AahMatrix m;
    m.diagonal = onsite_detunings(cfg);
    m.off_diagonal = Eigen::VectorXd::Constant(std::max(cfg.n - 1, 0), d.J);
    return m;
}

// ---------------------------- Markov validity check ---------------------------

enum class Validity { ok, violated, unknown };

struct ValidityReport {
    std::optional<double> ratio;  // N gamma / omega_a
    Validity status{Validity::unknown};

    bool ok() const { return status == Validity::ok; }
};

inline ValidityReport markov_validity(const ChainConfig& cfg, double threshold = 0.01) {
    ValidityReport report;
    if (!cfg.omega_ratio) return report;
    report.ratio = static_cast<double>(cfg.n) / *cfg.omega_ratio;
    report.status = *report.ratio <= threshold ? Validity::ok : Validity::violated;
    return report;
}

}  // namespace gawq
