#pragma once

#include "hmmpc/lmpc/cost.hpp"
#include "hmmpc/lmpc/gain.hpp"
#include "hmmpc/netsim/channel.hpp"
#include "hmmpc/schmm/inference.hpp"
#include "hmmpc/schmm/model.hpp"
#include "hmmpc/topology/compact.hpp"

#include <Eigen/Dense>

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hmmpc::runtime {

struct RuntimeOptions {
    double sample_period_ms = schmm::kDefaultSamplePeriodMs;
    int history_depth = 100;  ///< tau_max, in samples
    double eta = 0.1;
    bool learn = true;        ///< run the incremental EM update
    int N_max = 20;
    double v_ratio = 0.1;
};

/// Rolls `state` forward `steps` samples with the planned inputs, holding the last one.
Eigen::VectorXd predict_neighbor_state(const netsim::PacketFrame& frame, int tau_hat,
                                       const topology::AgentDynamics& dynamics);

/// What one agent knows about one neighbor.
struct NeighborTrack {
    int id = 0;
    schmm::SchmmModel model;
    schmm::FilterState filter;
    long latest_send_step = -1;           ///< freshest frame accepted so far
    bool anchored = false;                ///< prediction rests on a received frame
    Eigen::VectorXd prediction;           ///< estimate of x_j at `predicted_step`
    long predicted_step = 0;
    std::vector<Eigen::VectorXd> inputs;  ///< planned inputs used for rolling
    int input_offset = 0;
    /// The latest frame rolled by its true age (from the send step) rather
    /// than by the predicted delay. Feeds the history only.
    Eigen::VectorXd aligned;
    int aligned_offset = 0;
    std::deque<Eigen::VectorXd> history;  ///< history[l] = estimate of x_j(k - l), time-aligned
};

/// One processed frame, for delay telemetry.
struct DelayObservation {
    int sender = 0;
    long send_step = 0;
    int lag = 0;             ///< estimated previous delay, samples
    bool updated = false;    ///< incremental EM ran
    bool dropout = false;    ///< prediction was the dropout flag
    double predicted_ms = 0.0;
};

struct StepTelemetry {
    Eigen::VectorXd state;  ///< x_i(k) before actuation
    Eigen::VectorXd input;  ///< u_i(k)
    Eigen::VectorXd delta;  ///< local consensus point
    double error_norm = 0.0;  ///< ||x_i - delta_i|| over positions
    double V = 0.0;
    double alpha = 0.0;
    double J = 0.0;
    int horizon = 0;
    std::vector<DelayObservation> observations;
    std::vector<std::string> warnings;
};

struct StepOutput {
    Eigen::VectorXd input;
    netsim::PacketFrame frame;
    StepTelemetry telemetry;
};

/**
 * @brief Control loop of a single agent.
 *
 * Owns the agent's state, a certified gain for its compact system, and one
 * delay model per neighbor. Neighbor dynamics and initial states are global
 * knowledge; only states and planned inputs travel over the channel.
 */
class AgentRuntime {
public:
    AgentRuntime(int id, const topology::Topology& topology, std::vector<topology::AgentDynamics> dynamics,
                 std::shared_ptr<const lmpc::GainSolution> gain, const schmm::SchmmModel& initial_model,
                 const std::vector<Eigen::VectorXd>& initial_states, RuntimeOptions options);

    /// Receive, predict, control, actuate. Throws ConfigError when no gain
    /// was supplied and DivergenceError when the state stops being finite.
    StepOutput step(const std::vector<netsim::PacketFrame>& delivered, long k);

    int id() const { return id_; }
    const Eigen::VectorXd& state() const { return x_; }
    const std::vector<NeighborTrack>& tracks() const { return tracks_; }
    const NeighborTrack& track(int neighbor) const;
    const std::vector<Eigen::VectorXd>& planned_inputs() const { return planned_; }

private:
    void advance_predictions(long k);
    DelayObservation absorb(NeighborTrack& t, const netsim::PacketFrame& frame, std::vector<std::string>& warnings);

    int id_;
    int n_agents_;
    std::vector<int> neighbor_set_;
    std::vector<topology::AgentDynamics> dynamics_;
    std::shared_ptr<const lmpc::GainSolution> gain_;
    RuntimeOptions opt_;
    std::vector<int> translational_;
    Eigen::VectorXd x_;
    std::vector<Eigen::VectorXd> planned_;
    std::vector<NeighborTrack> tracks_;
};

}  // namespace hmmpc::runtime
