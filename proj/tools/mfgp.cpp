#include "mfgp/config.hpp"
#include "mfgp/error.hpp"
#include "mfgp/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    CLI::App app{"Mean field game planning solver"};
    app.require_subcommand(1);

    std::string path, out;
    std::uint64_t seed = 0;
    bool quiet = false;

    auto* solve = app.add_subcommand("solve", "Solve the problem described by a JSON config");
    auto* check = app.add_subcommand("validate", "Check the standing assumptions for a JSON config");
    for (auto* sub : {solve, check}) {
        sub->add_option("config", path, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out, "Output directory (overrides the config)");
        sub->add_option("-s,--seed", seed, "RNG seed (overrides the config)");
        sub->add_flag("-q,--quiet", quiet, "Suppress the summary");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        mfgp::RunConfig cfg = mfgp::parse_config(path);
        if (!out.empty()) cfg.output = out;
        if (solve->count("--seed") || check->count("--seed")) cfg.seed = seed;
        std::ostringstream sink;
        std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cout;
        if (check->parsed()) {
            cfg.mode = mfgp::Mode::validate;
            return mfgp::run_validate(cfg, log);
        }
        if (cfg.mode == mfgp::Mode::validate) return mfgp::run_validate(cfg, log);
        return mfgp::run(cfg, log);
    } catch (const mfgp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 1;
}
