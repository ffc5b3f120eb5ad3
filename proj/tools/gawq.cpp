// gawq: command-line driver: spectra, mode tables, butterfly maps,
// localization sweeps, loss sweeps and the oracle cross-check.

#include "gawq/cli_io.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Single-photon scattering on AAH-modulated giant-atom chains"};
    app.set_version_flag("--version", gawq::kVersion);
    app.require_subcommand(1);

    gawq::RunOptions opt;
    std::string config_path;
    std::string manifest_path;
    double delta_min = 0.0, delta_max = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config document")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--delta-min", delta_min, "lower detuning bound (rate units)");
        sub->add_option("--delta-max", delta_max, "upper detuning bound (rate units)");
        sub->add_option("--delta-points", opt.delta_points, "detuning grid points")
            ->capture_default_str()->check(CLI::Range(2, 10000000));
        sub->add_option("--threads", opt.threads, "worker threads (0 = all cores; GAWQ_THREADS overrides)");
        sub->add_option("--threshold", opt.threshold, "dip threshold on T")->capture_default_str();
    };

    std::vector<CLI::App*> subs;
    for (const auto& name : gawq::known_commands()) {
        auto* sub = app.add_subcommand(name);
        add_common(sub);
        subs.push_back(sub);
        if (name == "butterfly") {
            sub->add_option("--beta-count", opt.beta_count, "number of beta rows in (0,1)")
                ->capture_default_str()->check(CLI::PositiveNumber);
        }
        if (name == "localization") {
            sub->add_option("--v0-min", opt.v0_min, "sweep start, units of J")->capture_default_str();
            sub->add_option("--v0-max", opt.v0_max, "sweep end, units of J")->capture_default_str();
            sub->add_option("--v0-points", opt.v0_points, "sweep points")
                ->capture_default_str()->check(CLI::PositiveNumber);
        }
        if (name == "loss") {
            sub->add_option("--gamma0", opt.gamma0_values, "loss rates, units of gamma")
                ->delimiter(',')->capture_default_str();
        }
    }
    auto* replay = app.add_subcommand("replay", "re-execute a manifest.json");
    replay->add_option("--manifest", manifest_path, "manifest written by a previous run")
        ->required()->check(CLI::ExistingFile);
    replay->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    replay->add_option("--threads", opt.threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        gawq::RunResult res;
        if (replay->parsed()) {
            res = gawq::replay(manifest_path, opt.out_dir, opt.threads);
        } else {
            for (auto* sub : subs) {
                if (!sub->parsed()) continue;
                opt.command = sub->get_name();
                if (sub->count("--delta-min")) opt.delta_min = delta_min;
                if (sub->count("--delta-max")) opt.delta_max = delta_max;
            }
            auto parsed = gawq::load_config(config_path);
            for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
            opt.config = parsed.config;
            res = gawq::run(opt);
        }
        for (const auto& m : res.messages) std::cerr << m << '\n';
        for (const auto& f : res.files) std::cout << f.string() << '\n';
        return res.exit_code;
    } catch (const gawq::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
