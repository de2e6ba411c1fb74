#include "mvsim/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Particle solvers and property checks for McKean-Vlasov equations and variational inequalities"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string suite = "all";
    std::uint64_t seed = 0;
    unsigned threads = 1;

    auto add_scenario_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "override solver.seed");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* fwd = app.add_subcommand("run-forward", "simulate the forward equation");
    add_scenario_flags(fwd);
    auto* fbs = app.add_subcommand("run-fbsvs", "simulate the forward-backward system");
    add_scenario_flags(fbs);
    auto* rate = app.add_subcommand("rate-study", "refinement or penalization sweep");
    add_scenario_flags(rate);
    auto* props = app.add_subcommand("check-properties", "run property suites");
    props->add_option("--suite", suite, "convex, yw, wasserstein, moments, penalization, vi or all");
    props->add_option("--out", out, "output directory");
    props->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (props->parsed()) {
            const int rc = mvsim::check_properties(suite, out.empty() ? "out" : out, threads);
            if (rc != 0) std::cerr << "property failures, see properties.json\n";
            return rc;
        }
        mvsim::RunOptions opts;
        auto* cmd = app.get_subcommands().front();
        if (cmd->count("--seed")) opts.seed = seed;
        if (cmd->count("--out")) opts.out = out;
        if (cmd->count("--threads")) opts.threads = threads;
        const auto sc = mvsim::load_scenario_file(config, opts);
        if (fwd->parsed()) return mvsim::run_forward(sc);
        if (fbs->parsed()) return mvsim::run_fbsvs(sc);
        return mvsim::rate_study(sc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mvsim::exit_code_for(e);
    }
}
