#include "commands.hpp"

#include "vwave/errors.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace vwave::cli;
    CLI::App app{"Bound states of fractional Laplacians on V-shaped waveguides"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    Outputs out;
    long long seed = -1;
    int jobs = 0;
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--set", overrides, "KEY=VALUE override (repeatable)")->take_all();
    app.add_option("--out", out.dir, "output directory")->capture_default_str();
    app.add_option("--plot", out.plot, "SVG plot for sweep");
    app.add_option("--seed", seed, "seed of the iterative eigensolver start");
    app.add_option("--jobs", jobs, "OpenMP threads (0 keeps the runtime default)");

    for (const char* name : {"threshold", "eigs", "sweep", "certify"})
        app.add_subcommand(name)->fallthrough();
    app.get_subcommand("threshold")->description("threshold study on the cross-section");
    app.get_subcommand("eigs")->description("eigenvalues of one waveguide below the threshold");
    app.get_subcommand("sweep")->description("angle sweep with the squeeze bounds (CSV)");
    app.get_subcommand("certify")->description("trial-function and pushforward certificates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path, cfg);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw vwave::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed >= 0)
            cfg.set("seed", std::to_string(seed));
        if (jobs < 0)
            throw vwave::ConfigError("--jobs must be non-negative");
        if (jobs > 0)
            omp_set_num_threads(jobs);
        return run_command(app.get_subcommands().front()->get_name(), cfg, out, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
