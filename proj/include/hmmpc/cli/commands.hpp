#pragma once

#include "hmmpc/runtime/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace hmmpc::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitNumeric = 2,
    kExitNotConverged = 3,
};

struct TrainArgs {
    std::filesystem::path trace;
    int states = 3;
    int mixtures = 4;
    int max_iters = 50;
    double tol = 1e-8;
    double mask = 1e5;
    std::uint64_t seed = 1;
    double bin_ms = 10.0;
    std::filesystem::path out;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);

/// Runs the configured simulation and writes the run directory. `output`
/// overrides the directory named in the config.
int cmd_simulate(const std::filesystem::path& config, const std::optional<std::filesystem::path>& output,
                 std::ostream& out, std::ostream& err);

/// Summarizes a run directory and writes summary.csv into it.
int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

struct RunSummary {
    int agents = 0;
    long steps = 0;
    double sample_period_ms = 0.0;
    double final_max_error = 0.0;
    double final_max_ratio = 0.0;
    double final_delta_max = 0.0;
    std::optional<double> time_to_threshold_s;  ///< settling time at 1 % of the initial errors
    double dropout_rate = 0.0;
    double mean_delay_error_ms = 0.0;
    long packets = 0;
};

RunSummary summarize(const runtime::SimResult& result);

/// Header plus one row.
std::string format_summary_csv(const RunSummary& summary);

}  // namespace hmmpc::cli
