#include "hmmpc/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace hmmpc::cli;

    CLI::App app{"hmmpc: delay-aware consensus with SCHMM prediction and Lyapunov MPC"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "fit an SCHMM to a delay trace");
    t->add_option("--trace", train.trace, "delay trace, one value in ms per line")->required()->check(CLI::ExistingFile);
    t->add_option("--states", train.states, "hidden states")->capture_default_str()->check(CLI::Range(1, 64));
    t->add_option("--mixtures", train.mixtures, "codebook size including the dropout component")
        ->capture_default_str()
        ->check(CLI::Range(2, 64));
    t->add_option("--max-iters", train.max_iters, "EM iterations")->capture_default_str()->check(CLI::PositiveNumber);
    t->add_option("--tol", train.tol, "log-likelihood gain at which EM stops")->capture_default_str();
    t->add_option("--mask", train.mask, "delay value that marks a dropout")->capture_default_str();
    t->add_option("--seed", train.seed, "k-means seed")->capture_default_str();
    t->add_option("--bin", train.bin_ms, "observation bin width in ms")->capture_default_str();
    t->add_option("--out", train.out, "model file to write")->required();

    std::string config;
    std::string sim_out;
    auto* s = app.add_subcommand("simulate", "run a consensus simulation");
    s->add_option("--config", config, "YAML simulation config")->required()->check(CLI::ExistingFile);
    s->add_option("--out", sim_out, "override the output directory");

    std::string report_dir;
    auto* r = app.add_subcommand("report", "summarize a simulation run");
    r->add_option("--in", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*t) return cmd_train(train, std::cout, std::cerr);
    if (*s) {
        std::optional<std::filesystem::path> override_dir;
        if (!sim_out.empty()) override_dir = sim_out;
        return cmd_simulate(config, override_dir, std::cout, std::cerr);
    }
    return cmd_report(report_dir, std::cout, std::cerr);
}
