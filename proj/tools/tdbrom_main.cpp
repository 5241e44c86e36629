// Command-line front end: run / bench / validate over a config file.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tdb/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"time-dependent-basis reduced-order modeling with sparse right-hand-side interpolation"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    std::string outdir_override;
    int threads_override = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "path to the run configuration")->required();
        sub->add_option("--seed", seed_override, "override [run] seed")->each([&](const std::string&) { have_seed = true; });
        sub->add_option("--output-dir", outdir_override, "override [run] output_dir");
        sub->add_option("--threads", threads_override, "override [run] threads");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute the configured mode (fom|tdb|stdb|compare)");
    add_common(cmd_run);
    CLI::App* cmd_bench = app.add_subcommand("bench", "wall-clock scaling sweep (TDB vs sparse TDB)");
    add_common(cmd_bench);
    CLI::App* cmd_validate = app.add_subcommand("validate", "parse and validate the configuration");
    add_common(cmd_validate);

    CLI11_PARSE(app, argc, argv);

    tdb::RunConfig cfg;
    try {
        cfg = tdb::parse_config_file(config_path);
    } catch (const tdb::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (have_seed) cfg.seed = seed_override;
    if (!outdir_override.empty()) cfg.output_dir = outdir_override;
    if (threads_override > 0) cfg.threads = threads_override;

    if (app.got_subcommand(cmd_validate)) {
        const auto bad = tdb::validate_config(cfg);
        if (bad.empty()) {
            std::cout << "config ok\n";
            return 0;
        }
        std::cerr << "config validation failed:\n";
        for (const auto& m : bad) std::cerr << "  " << m << '\n';
        return 2;
    }
    if (app.got_subcommand(cmd_bench)) cfg.mode = "bench";
    return tdb::run(cfg);
}
