#pragma once

#include "hmmpc/runtime/simulation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace hmmpc::cli {

// Simulation configs are YAML documents. Every key is optional except
// `graph`, `agent_model` and the channel source; the layout is
//
//   graph: example1.graph            # edge list, see topology::parse_graph
//   dynamics:
//     template: double-integrator-3d # or give A and B as nested lists
//     input_gain: 10
//   weights:
//     P: 1                           # scalar (times identity) or n x n list
//     Q: 1                           # scalar or m x m list
//     P_v: riccati                   # "riccati" or an nN x nN list
//     theta: 0.99
//     N_max: 20
//     v_ratio: 0.1
//     epsilon: 1.0e-6
//     alpha0: 1.0e-3
//   channel:
//     source: model                  # model | trace | constant
//     model: lambda_star.model       # for source: model
//     trace: delays.trace            # for source: trace
//     delay_ms: 50                   # for source: constant
//   agent_model: lambda_star.model
//   eta: 0.1
//   learn: true
//   sample_period_ms: 10
//   history_depth: 100
//   mask: 100000
//   steps: 2000                      # or duration_s
//   seed: 1
//   snapshot_interval: 100
//   output: out/example1
//
// Relative paths are resolved against the directory of the config file.

struct DynamicsSpec {
    std::string name = "double-integrator-3d";  ///< empty when A and B are explicit
    double input_gain = 10.0;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    std::vector<int> translational;
};

struct WeightSpec {
    Eigen::MatrixXd P;           ///< empty: identity
    Eigen::MatrixXd Q;           ///< empty: identity
    Eigen::MatrixXd P_v;         ///< empty: Riccati solution
    double theta = 0.99;
    int N_max = 20;
    double v_ratio = 0.1;
    double epsilon = 1e-6;
    double alpha0 = 1e-3;
};

enum class ChannelKind { Model, Trace, Constant };

struct ChannelSpec {
    ChannelKind kind = ChannelKind::Model;
    std::filesystem::path model;
    std::filesystem::path trace;
    double delay_ms = 0.0;
};

struct SimConfig {
    std::filesystem::path graph;
    DynamicsSpec dynamics;
    WeightSpec weights;
    ChannelSpec channel;
    std::filesystem::path agent_model;
    double eta = 0.1;
    bool learn = true;
    double sample_period_ms = 10.0;
    int history_depth = 100;
    double mask = 1e5;
    long steps = 2000;
    std::uint64_t seed = 1;
    long snapshot_interval = 0;
    std::filesystem::path output = "out";

    bool operator==(const SimConfig& other) const;
};

/// Parses YAML text. Relative paths stay relative; throws ConfigError
/// naming the offending field.
SimConfig parse_config(const std::string& text);

/// Serializes to the YAML layout above; parse_config reads it back unchanged.
std::string format_config(const SimConfig& config);

/// Loads a file and resolves relative paths against its directory.
SimConfig load_config(const std::filesystem::path& path);

/// Checks referenced files and value ranges (ConfigError on the first problem).
void validate_config(const SimConfig& config);

/// Loads graph and models and assembles a runnable scenario.
runtime::Scenario build_scenario(const SimConfig& config);

}  // namespace hmmpc::cli
