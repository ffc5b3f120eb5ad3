// cli_io.hpp: config documents, CSV emission, run manifests and the
// subcommand drivers behind the `gawq` tool.
//
// Config document: flat JSON object.
//   n            integer >= 1                       (required)
//   gamma1/gamma2  rates >= 0                       (or gamma/delta, not both)
//   zeta         > 0, default 1
//   winding      integer >= 1, default 1
//   v0           number or "<x>J" (multiple of the derived J), default 0
//   beta         "p/q" | number | "golden", default "0/1"
//   varphi       number or "<a>pi/<b>" string, default 0
//   gamma0       >= 0, default 0
//   omega_ratio  > 0, optional
//
// Every CSV has a one-line header and prints doubles with 17 significant
// digits, so re-running a manifest reproduces the files byte for byte.

#pragma once

#include "gawq/aah_oracle.hpp"
#include "gawq/analysis.hpp"
#include "gawq/chain_model.hpp"
#include "gawq/modes.hpp"
#include "gawq/parallel.hpp"
#include "gawq/scattering.hpp"
#include "gawq/version.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gawq {

using Json = nlohmann::ordered_json;

// --------------------------------- parsing ------------------------------------

namespace detail {

inline std::optional<double> parse_number(std::string_view s) {
    std::string str(s);
    try {
        std::size_t used = 0;
        const double v = std::stod(str, &used);
        if (used != str.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// "3pi/4", "-pi/2", "0.5pi", "pi", or a plain number.
inline std::optional<double> parse_angle(std::string_view s) {
    static const std::regex pattern(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$)");
    std::string str(s);
    std::smatch m;
    if (std::regex_match(str, m, pattern)) {
        double coef = 1.0;
        const std::string c = m[1].str();
        if (c == "-") {
            coef = -1.0;
        } else if (!c.empty() && c != "+") {
            coef = std::stod(c);
        }
        const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
        if (den == 0.0) return std::nullopt;
        return coef * std::numbers::pi / den;
    }
    return parse_number(str);
}

inline std::optional<BetaSpec> parse_beta(const Json& v, std::string& error) {
    if (v.is_number()) return BetaSpec{RealBeta{v.get<double>()}};
    if (!v.is_string()) {
        error = "beta: expected \"p/q\", a number or \"golden\"";
        return std::nullopt;
    }
    const auto s = v.get<std::string>();
    if (s == "golden") return BetaSpec{GoldenInverse{}};
    static const std::regex rational(R"(^\s*(\d+)\s*/\s*(\d+)\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, rational)) {
        const BetaSpec b{Rational{std::stoi(m[1].str()), std::stoi(m[2].str())}};
        try {
            validate_beta(b);
        } catch (const ConfigError& e) {
            error = e.what();
            return std::nullopt;
        }
        return b;
    }
    if (const auto x = parse_number(s)) return BetaSpec{RealBeta{*x}};
    error = "beta: cannot parse \"" + s + "\"";
    return std::nullopt;
}

}  // namespace detail

struct ParsedConfig {
    ChainConfig config;
    std::vector<std::string> warnings;
};

// Collects every field problem and throws one ConfigError listing them all.
inline ParsedConfig parse_config(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
    static const std::vector<std::string> known = {"n",      "gamma1", "gamma2", "gamma",
                                                   "delta",  "zeta",   "winding", "v0",
                                                   "beta",   "varphi", "gamma0", "omega_ratio"};
    std::vector<std::string> errors;
    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            errors.push_back("unknown key \"" + key + "\"");
        }
    }

    ChainConfig cfg;
    auto number = [&](const char* key, double& out, bool required) {
        if (!doc.contains(key)) {
            if (required) errors.push_back(std::string(key) + ": missing");
            return;
        }
        if (!doc[key].is_number()) {
            errors.push_back(std::string(key) + ": expected a number");
            return;
        }
        out = doc[key].get<double>();
    };
    auto integer = [&](const char* key, int& out, bool required) {
        if (!doc.contains(key)) {
            if (required) errors.push_back(std::string(key) + ": missing");
            return;
        }
        if (!doc[key].is_number_integer()) {
            errors.push_back(std::string(key) + ": expected an integer");
            return;
        }
        out = doc[key].get<int>();
    };

    integer("n", cfg.n, true);
    const bool split = doc.contains("gamma1") || doc.contains("gamma2");
    const bool mean = doc.contains("gamma") || doc.contains("delta");
    if (split && mean) {
        errors.emplace_back("rates: give either gamma1/gamma2 or gamma/delta, not both");
    } else if (mean) {
        double g = 1.0, d = 0.0;
        number("gamma", g, true);
        number("delta", d, false);
        cfg.gamma1 = g - d;
        cfg.gamma2 = g + d;
    } else {
        number("gamma1", cfg.gamma1, true);
        number("gamma2", cfg.gamma2, true);
    }
    number("zeta", cfg.zeta, false);
    integer("winding", cfg.winding, false);
    number("gamma0", cfg.gamma0, false);
    if (doc.contains("omega_ratio")) {
        double w = 0.0;
        number("omega_ratio", w, false);
        cfg.omega_ratio = w;
    }
    if (doc.contains("beta")) {
        std::string err;
        if (auto b = detail::parse_beta(doc["beta"], err)) {
            cfg.beta = *b;
        } else {
            errors.push_back(err);
        }
    }
    if (doc.contains("varphi")) {
        const auto& v = doc["varphi"];
        std::optional<double> a;
        if (v.is_number()) a = v.get<double>();
        if (v.is_string()) a = detail::parse_angle(v.get<std::string>());
        if (a) {
            cfg.varphi = *a;
        } else {
            errors.emplace_back("varphi: expected a number or a string like \"3pi/4\"");
        }
    }

    // v0 last: "xJ" needs the derived J.
    std::optional<double> v0_in_j;
    if (doc.contains("v0")) {
        const auto& v = doc["v0"];
        if (v.is_number()) {
            cfg.v0 = v.get<double>();
        } else if (v.is_string()) {
            std::string s = v.get<std::string>();
            if (!s.empty() && (s.back() == 'J' || s.back() == 'j')) {
                s.pop_back();
                const auto x = s.empty() ? std::optional<double>(1.0) : detail::parse_number(s);
                if (x) {
                    v0_in_j = *x;
                } else {
                    errors.push_back("v0: cannot parse \"" + v.get<std::string>() + "\"");
                }
            } else if (const auto x = detail::parse_number(s)) {
                cfg.v0 = *x;
            } else {
                errors.push_back("v0: cannot parse \"" + s + "\"");
            }
        } else {
            errors.emplace_back("v0: expected a number or \"<x>J\"");
        }
    }

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    if (v0_in_j) {
        if (cfg.zeta <= 0.0 || cfg.winding < 1) throw ConfigError("v0: J undefined for this zeta/winding");
        cfg.v0 = *v0_in_j * std::abs(derive_couplings(cfg).J);
    }

    ParsedConfig out;
    out.config = cfg;
    try {
        out.warnings = validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("invalid config:\n  ") + e.what());
    }
    return out;
}

inline ParsedConfig parse_config_text(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline ParsedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// All fields materialised; parse_config(config_to_json(c)) reproduces c.
inline Json config_to_json(const ChainConfig& cfg) {
    Json j;
    j["n"] = cfg.n;
    j["gamma1"] = cfg.gamma1;
    j["gamma2"] = cfg.gamma2;
    j["zeta"] = cfg.zeta;
    j["winding"] = cfg.winding;
    j["v0"] = cfg.v0;
    if (std::holds_alternative<RealBeta>(cfg.beta)) {
        j["beta"] = std::get<RealBeta>(cfg.beta).value;
    } else {
        j["beta"] = beta_to_string(cfg.beta);
    }
    j["varphi"] = cfg.varphi;
    j["gamma0"] = cfg.gamma0;
    if (cfg.omega_ratio) j["omega_ratio"] = *cfg.omega_ratio;
    return j;
}

// ----------------------------------- CSV --------------------------------------

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        (put(cells, first), ...);
        out_ << '\n';
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

    void save(const std::filesystem::path& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << out_.str();
    }

private:
    void put(double v, bool& first) { sep(first) << fmt_double(v); }
    void put(int v, bool& first) { sep(first) << v; }
    void put(std::size_t v, bool& first) { sep(first) << v; }
    void put(const std::string& v, bool& first) { sep(first) << v; }
    void put(const char* v, bool& first) { sep(first) << v; }
    void put(cd v, bool& first) {
        put(v.real(), first);
        put(v.imag(), first);
    }
    std::ostream& sep(bool& first) {
        if (!first) out_ << ',';
        first = false;
        return out_;
    }

    std::ostringstream out_;
};

inline const char* path_name(PointPath p) {
    switch (p) {
        case PointPath::direct: return "direct";
        case PointPath::lorentzian: return "lorentzian";
        case PointPath::fallback: return "fallback";
        case PointPath::failed: return "failed";
    }
    return "?";
}

inline CsvWriter spectrum_csv(const SpectrumGrid& g) {
    CsvWriter w({"delta", "t_re", "t_im", "r_re", "r_im", "T", "R", "path"});
    for (std::size_t i = 0; i < g.size(); ++i) {
        w.row(g.delta[i], g.t[i], g.r[i], g.T[i], g.R[i], path_name(g.path[i]));
    }
    return w;
}

inline CsvWriter modes_csv(const ModeSet& ms) {
    CsvWriter w({"n", "center", "width", "eta_re", "eta_im", "xi_re", "xi_im"});
    for (int k = 0; k < ms.size(); ++k) {
        w.row(k + 1, ms.centers(k), ms.widths(k), ms.eta(k), ms.xi(k));
    }
    return w;
}

inline CsvWriter aah_csv(const AahEigensystem& es) {
    CsvWriter w({"n", "E_n", "IPR_n"});
    for (int k = 0; k < es.size(); ++k) w.row(k + 1, es.energies(k), ipr(es.states.col(k)));
    return w;
}

inline CsvWriter dips_csv(const DipTable& dips) {
    CsvWriter w({"center", "width", "depth"});
    for (const auto& d : dips.dips) w.row(d.center, d.width, d.depth);
    return w;
}

// ------------------------------ run orchestration ------------------------------

struct RunOptions {
    std::string command;
    ChainConfig config;
    std::optional<double> delta_min;
    std::optional<double> delta_max;
    int delta_points{1500};
    int beta_count{299};
    double v0_min{0.0};  // in units of J
    double v0_max{8.0};
    int v0_points{81};
    std::vector<double> gamma0_values{0.0, 1e-3, 1e-2};  // in units of gamma
    double threshold{kDefaultDipThreshold};
    int threads{0};
    std::filesystem::path out_dir{"."};
};

struct RunResult {
    int exit_code{0};
    std::vector<std::filesystem::path> files;
    std::vector<std::string> messages;
};

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds = {"spectrum",     "modes", "butterfly",
                                                  "localization", "loss",  "oracle-check"};
    return cmds;
}

inline constexpr double kMaxInvalidFraction = 0.01;
inline constexpr double kOracleTolerance = 1e-8;

namespace detail {

inline std::vector<double> delta_grid(const RunOptions& opt, std::pair<double, double> fallback) {
    const double lo = opt.delta_min.value_or(fallback.first);
    const double hi = opt.delta_max.value_or(fallback.second);
    return uniform_grid(lo, hi, static_cast<std::size_t>(opt.delta_points));
}

inline Json grids_json(const RunOptions& opt) {
    Json g;
    if (opt.delta_min) g["delta_min"] = *opt.delta_min;
    if (opt.delta_max) g["delta_max"] = *opt.delta_max;
    g["delta_points"] = opt.delta_points;
    g["beta_count"] = opt.beta_count;
    g["v0_min"] = opt.v0_min;
    g["v0_max"] = opt.v0_max;
    g["v0_points"] = opt.v0_points;
    g["gamma0_values"] = opt.gamma0_values;
    g["threshold"] = opt.threshold;
    return g;
}

}  // namespace detail

inline Json manifest_json(const RunOptions& opt, const RunResult& res, double seconds,
                          int threads) {
    Json m;
    m["command"] = opt.command;
    m["config"] = config_to_json(opt.config);
    m["grids"] = detail::grids_json(opt);
    Json files = Json::array();
    for (const auto& f : res.files) files.push_back(f.filename().string());
    m["outputs"] = files;
    m["messages"] = res.messages;
    m["exit_code"] = res.exit_code;
    m["threads"] = threads;
    m["tool_version"] = kVersion;
    m["wall_clock_seconds"] = seconds;
    return m;
}

inline RunOptions options_from_manifest(const Json& m) {
    RunOptions opt;
    opt.command = m.at("command").get<std::string>();
    opt.config = parse_config(m.at("config")).config;
    const auto& g = m.at("grids");
    if (g.contains("delta_min")) opt.delta_min = g["delta_min"].get<double>();
    if (g.contains("delta_max")) opt.delta_max = g["delta_max"].get<double>();
    opt.delta_points = g.value("delta_points", opt.delta_points);
    opt.beta_count = g.value("beta_count", opt.beta_count);
    opt.v0_min = g.value("v0_min", opt.v0_min);
    opt.v0_max = g.value("v0_max", opt.v0_max);
    opt.v0_points = g.value("v0_points", opt.v0_points);
    if (g.contains("gamma0_values")) opt.gamma0_values = g["gamma0_values"].get<std::vector<double>>();
    opt.threshold = g.value("threshold", opt.threshold);
    return opt;
}

namespace detail {

inline void emit(RunResult& res, const std::filesystem::path& dir, const std::string& name,
                 const CsvWriter& csv) {
    const auto path = dir / name;
    csv.save(path);
    res.files.push_back(path);
}

inline void check_fraction(RunResult& res, std::size_t bad, std::size_t total, const char* what) {
    if (total == 0) return;
    const double frac = static_cast<double>(bad) / static_cast<double>(total);
    if (bad > 0) {
        res.messages.push_back(std::to_string(bad) + " of " + std::to_string(total) + " " + what +
                               " invalid");
    }
    if (frac > kMaxInvalidFraction) res.exit_code = 1;
}

inline void run_spectrum(const RunOptions& opt, int threads, RunResult& res, bool full) {
    const auto& cfg = opt.config;
    const auto model = build_effective_model(cfg);
    const auto modes = decompose(model);
    if (modes.defective) res.messages.emplace_back("mode matrix is near-defective (exceptional point)");
    if (modes.division_by_zero_width()) {
        res.messages.emplace_back("some modes have vanishing width; eta/xi reported as NaN");
    }
    if (!full) {
        emit(res, opt.out_dir, "modes.csv", modes_csv(modes));
        return;
    }
    const auto grid = delta_grid(opt, default_window(cfg));
    const auto sg = spectrum(model, grid, threads);
    emit(res, opt.out_dir, "spectrum.csv", spectrum_csv(sg));
    emit(res, opt.out_dir, "modes.csv", modes_csv(modes));
    emit(res, opt.out_dir, "aah.csv", aah_csv(eigensystem(build_aah_matrix(cfg))));
    emit(res, opt.out_dir, "dips.csv", dips_csv(find_dips(sg, opt.threshold)));
    check_fraction(res, sg.count(PointPath::failed), sg.size(), "grid points");
}

inline void run_butterfly(const RunOptions& opt, int threads, RunResult& res) {
    const auto grid = delta_grid(opt, default_window(opt.config));
    const auto map = butterfly_assemble(opt.config, opt.beta_count, grid, threads);

    std::vector<std::string> header{"beta"};
    for (double d : grid) header.push_back(fmt_double(d));
    CsvWriter t(header);
    CsvWriter aah({"beta", "n", "E_n"});
    for (std::size_t row = 0; row < map.betas.size(); ++row) {
        std::vector<std::string> cells{fmt_double(beta_value(map.betas[row]))};
        for (Eigen::Index c = 0; c < map.T.cols(); ++c) {
            cells.push_back(fmt_double(map.T(static_cast<Eigen::Index>(row), c)));
        }
        t.row_strings(cells);
        ChainConfig cfg = opt.config;
        cfg.beta = map.betas[row];
        const auto es = eigensystem(build_aah_matrix(cfg));
        for (int k = 0; k < es.size(); ++k) aah.row(beta_value(map.betas[row]), k + 1, es.energies(k));
        if (!map.row_valid[row]) {
            res.messages.push_back("row beta=" + beta_to_string(map.betas[row]) + ": " +
                                   map.row_error[row]);
        }
    }
    emit(res, opt.out_dir, "butterfly.csv", t);
    emit(res, opt.out_dir, "butterfly_aah.csv", aah);
    check_fraction(res, map.invalid_rows(), map.betas.size(), "rows");
}

inline void run_localization(const RunOptions& opt, int threads, RunResult& res) {
    const auto& cfg = opt.config;
    const double J = std::abs(derive_couplings(cfg).J);
    std::vector<double> v0s;
    if (opt.v0_points == 1) {
        v0s.push_back(opt.v0_min * J);
    } else {
        for (double x : uniform_grid(opt.v0_min, opt.v0_max, static_cast<std::size_t>(opt.v0_points))) {
            v0s.push_back(x * J);
        }
    }
    const auto reports = localization_sweep(cfg, v0s, threads);
    const bool lossy = cfg.gamma0 > 0.0;
    std::vector<std::string> header{"V0", "sigma2", "iprDecay", "aahGroundIpr"};
    if (lossy) {
        header.emplace_back("sigma2Lossy");
        header.emplace_back("iprDecayLossy");
    }
    CsvWriter w(header);
    for (const auto& r : reports) {
        if (lossy) {
            w.row(r.v0, r.sigma2, r.ipr_decay, r.aah_ground_ipr, *r.sigma2_lossy, *r.ipr_decay_lossy);
        } else {
            w.row(r.v0, r.sigma2, r.ipr_decay, r.aah_ground_ipr);
        }
    }
    emit(res, opt.out_dir, "localization.csv", w);
}

inline void run_loss(const RunOptions& opt, int threads, RunResult& res) {
    const auto d = derive_couplings(opt.config);
    const double J = std::abs(d.J);
    const auto grid = delta_grid(opt, {-J, J});
    std::vector<SpectrumGrid> rows;
    std::vector<std::string> header{"delta"};
    std::size_t failed = 0, total = 0;
    for (double g0 : opt.gamma0_values) {
        ChainConfig cfg = opt.config;
        cfg.gamma0 = g0 * d.gamma_mean;
        rows.push_back(spectrum(build_effective_model(cfg), grid, threads));
        header.push_back("T_gamma0=" + fmt_double(g0));
        failed += rows.back().count(PointPath::failed);
        total += rows.back().size();
    }
    CsvWriter w(header);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<std::string> cells{fmt_double(grid[i])};
        for (const auto& r : rows) cells.push_back(fmt_double(r.T[i]));
        w.row_strings(cells);
    }
    emit(res, opt.out_dir, "loss.csv", w);
    check_fraction(res, failed, total, "grid points");
}

inline void run_oracle_check(const RunOptions& opt, int threads, RunResult& res) {
    const auto& cfg = opt.config;
    const auto model = build_effective_model(cfg);
    const auto grid = delta_grid(opt, default_window(cfg));
    std::vector<Amplitudes> direct(grid.size());
    std::vector<OracleSolution> oracle(grid.size());
    std::vector<char> ok(grid.size(), 1);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            direct[i] = amplitudes(model, grid[i]);
            oracle[i] = eom_oracle(cfg, grid[i]);
        } catch (const IllConditioned&) {
            ok[i] = 0;
        } catch (const SingularSystem&) {
            ok[i] = 0;
        }
    });
    CsvWriter w({"delta", "t_direct_re", "t_direct_im", "t_oracle_re", "t_oracle_im", "abs_dt", "abs_dr"});
    double worst = 0.0;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!ok[i]) {
            ++bad;
            continue;
        }
        const double dt = std::abs(direct[i].t - oracle[i].t);
        const double dr = std::abs(direct[i].r - oracle[i].r);
        worst = std::max({worst, dt, dr});
        w.row(grid[i], direct[i].t, oracle[i].t, dt, dr);
    }
    emit(res, opt.out_dir, "oracle.csv", w);
    res.messages.push_back("max |oracle - direct| = " + fmt_double(worst));
    check_fraction(res, bad, grid.size(), "grid points");
    if (!(worst < kOracleTolerance)) res.exit_code = 1;
}

}  // namespace detail

// Runs one subcommand, writes its CSVs and manifest.json into opt.out_dir.
inline RunResult run(const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const int threads = resolve_threads(opt.threads);
    validate(opt.config);
    std::filesystem::create_directories(opt.out_dir);

    RunResult res;
    if (opt.command == "spectrum") {
        detail::run_spectrum(opt, threads, res, true);
    } else if (opt.command == "modes") {
        detail::run_spectrum(opt, threads, res, false);
    } else if (opt.command == "butterfly") {
        detail::run_butterfly(opt, threads, res);
    } else if (opt.command == "localization") {
        detail::run_localization(opt, threads, res);
    } else if (opt.command == "loss") {
        detail::run_loss(opt, threads, res);
    } else if (opt.command == "oracle-check") {
        detail::run_oracle_check(opt, threads, res);
    } else {
        throw std::invalid_argument("unknown command \"" + opt.command + "\"");
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto manifest_path = opt.out_dir / "manifest.json";
    std::ofstream mf(manifest_path);
    mf << manifest_json(opt, res, seconds, threads).dump(2) << '\n';
    return res;
}

inline RunResult replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                        int threads = 0) {
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("cannot open manifest " + manifest.string());
    auto opt = options_from_manifest(Json::parse(in));
    opt.out_dir = out_dir;
    opt.threads = threads;
    return run(opt);
}

}  // namespace gawq
