#pragma once

#include "hmmpc/lmpc/gain.hpp"
#include "hmmpc/netsim/delay_source.hpp"
#include "hmmpc/runtime/agent.hpp"
#include "hmmpc/schmm/model.hpp"
#include "hmmpc/topology/compact.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hmmpc::runtime {

/// Everything a run needs, already loaded and validated.
struct Scenario {
    topology::Topology topology = topology::complete_graph(1);
    std::vector<topology::AgentDynamics> dynamics;
    lmpc::CostWeights weights;
    double theta = 0.99;
    schmm::SchmmModel agent_model;     ///< initial model of every (agent, neighbor) pair
    netsim::DelaySource channel;       ///< per-link delay processes
    RuntimeOptions runtime;
    double mask = schmm::kDefaultMask;
    long steps = 0;
    std::uint64_t seed = 1;
    /// Empty: drawn from a standard normal generator seeded with `seed`.
    std::vector<Eigen::VectorXd> initial_states;
    long snapshot_interval = 0;  ///< model snapshot period in steps; 0 = first and last only
};

/// One row of delays.csv: a packet sent on a link and what the receiver made of it.
struct DelayRecord {
    long send_step = 0;
    int sender = 0;
    int receiver = 0;
    std::optional<double> predicted_ms;  ///< empty when never processed; mask for a predicted dropout
    double realized_ms = 0.0;
    bool dropped = false;
};

struct ModelSnapshot {
    long step = 0;
    int agent = 0;
    int neighbor = 0;
    schmm::SchmmModel model;
};

struct SimResult {
    long steps = 0;
    int n_agents = 0;
    double sample_period_ms = 0.0;
    std::vector<int> translational;
    // [step][agent]
    std::vector<std::vector<Eigen::VectorXd>> states;
    std::vector<std::vector<Eigen::VectorXd>> inputs;
    std::vector<std::vector<Eigen::VectorXd>> deltas;
    std::vector<std::vector<double>> error_norm;
    std::vector<std::vector<double>> V;
    std::vector<std::vector<double>> alpha;
    std::vector<std::vector<double>> J;
    std::vector<std::vector<int>> horizon;
    std::vector<double> delta_max;  ///< [step]
    std::vector<DelayRecord> delays;
    std::vector<ModelSnapshot> snapshots;
    std::vector<std::shared_ptr<const lmpc::GainSolution>> gains;
    std::string channel_stats_csv;  ///< body rows of channel.csv
    std::vector<std::string> warnings;
};

/// Standard normal initial states, agent after agent.
std::vector<Eigen::VectorXd> random_initial_states(int n_agents, int n, std::uint64_t seed);

/// Synthesizes and certifies every agent's gain (CertificateError / SynthesisError on failure).
std::vector<std::shared_ptr<const lmpc::GainSolution>> synthesize_all(const Scenario& scenario);

/// Steps 0..steps-1: deliveries, agent steps, sends. Throws DivergenceError
/// at the first non-finite state.
SimResult run_simulation(const Scenario& scenario);

}  // namespace hmmpc::runtime
