#include "hmmpc/runtime/agent.hpp"

#include "hmmpc/error.hpp"
#include "hmmpc/schmm/incremental.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hmmpc::runtime {

Eigen::VectorXd predict_neighbor_state(const netsim::PacketFrame& frame, int tau_hat,
                                       const topology::AgentDynamics& dynamics) {
    if (tau_hat < 0) throw DomainError("predicted delay must be non-negative");
    return topology::roll_forward(dynamics, frame.state, frame.planned_inputs, tau_hat);
}

AgentRuntime::AgentRuntime(int id, const topology::Topology& topology, std::vector<topology::AgentDynamics> dynamics,
                           std::shared_ptr<const lmpc::GainSolution> gain, const schmm::SchmmModel& initial_model,
                           const std::vector<Eigen::VectorXd>& initial_states, RuntimeOptions options)
    : id_(id),
      n_agents_(topology.n_agents()),
      neighbor_set_(topology.neighbor_set(id)),
      dynamics_(std::move(dynamics)),
      gain_(std::move(gain)),
      opt_(options) {
    if (static_cast<int>(dynamics_.size()) != n_agents_ || static_cast<int>(initial_states.size()) != n_agents_) {
        throw DomainError("need dynamics and an initial state for every agent");
    }
    initial_model.validate();
    translational_ = dynamics_[static_cast<std::size_t>(id)].translational;
    x_ = initial_states[static_cast<std::size_t>(id)];
    for (int j : topology.neighbors(id)) {
        NeighborTrack t;
        t.id = j;
        t.model = initial_model;
        t.filter = schmm::initial_filter(initial_model);
        t.prediction = initial_states[static_cast<std::size_t>(j)];
        t.aligned = t.prediction;
        t.history.push_back(t.prediction);
        tracks_.push_back(std::move(t));
    }
}

const NeighborTrack& AgentRuntime::track(int neighbor) const {
    for (const auto& t : tracks_) {
        if (t.id == neighbor) return t;
    }
    throw DomainError("agent " + std::to_string(neighbor) + " is not a neighbor of " + std::to_string(id_));
}

void AgentRuntime::advance_predictions(long k) {
    for (auto& t : tracks_) {
        const auto& dyn = dynamics_[static_cast<std::size_t>(t.id)];
        while (t.predicted_step < k) {
            // Before the first frame the neighbor is assumed to sit at its
            // initial state; afterwards its plan is replayed.
            if (t.anchored) {
                t.prediction = topology::roll_forward(dyn, t.prediction, t.inputs, 1, t.input_offset);
                t.aligned = topology::roll_forward(dyn, t.aligned, t.inputs, 1, t.aligned_offset);
                ++t.input_offset;
                ++t.aligned_offset;
            }
            ++t.predicted_step;
            t.history.push_front(t.aligned);
            while (static_cast<int>(t.history.size()) > opt_.history_depth + 1) t.history.pop_back();
        }
    }
}

DelayObservation AgentRuntime::absorb(NeighborTrack& t, const netsim::PacketFrame& frame,
                                      std::vector<std::string>& warnings) {
    DelayObservation obs;
    obs.sender = frame.sender;
    obs.send_step = frame.send_step;

    std::vector<schmm::LaggedState> lagged;
    lagged.reserve(t.history.size());
    for (std::size_t l = 0; l < t.history.size(); ++l) lagged.push_back({static_cast<int>(l), t.history[l]});
    const std::vector<double> r = schmm::lag_residuals(frame.state, lagged, opt_.history_depth);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    // A constant history (cold start) says nothing about the delay.
    const bool informative = *hi - *lo > 1e-12 * (1.0 + *hi);
    obs.lag = schmm::estimate_prev_delay(frame.state, lagged, opt_.history_depth);

    schmm::DelayPrediction pred;
    if (informative && obs.lag > 0) {
        // A frame that took `lag` steps was delayed by some time in
        // ((lag - 1) T_s, lag T_s]; the midpoint keeps learned means off the
        // bin edges where ceil() would flip the predicted step count.
        const double tau_prev = (obs.lag - 0.5) * opt_.sample_period_ms;
        if (opt_.learn) {
            // tau_prev is a whole number of samples, so it carries at least
            // the variance of uniform rounding noise.
            const double quantization_var = opt_.sample_period_ms * opt_.sample_period_ms / 12.0;
            auto upd = schmm::incremental_em_update(t.model, tau_prev, opt_.eta, opt_.sample_period_ms,
                                                    quantization_var);
            if (!upd.accepted) warnings.push_back("agent " + std::to_string(id_) + ", neighbor " + std::to_string(t.id) + ": " + upd.warning);
            t.model = std::move(upd.model);
            obs.updated = upd.accepted;
        }
        const auto vit = schmm::viterbi_predict(t.model, t.filter, tau_prev, opt_.sample_period_ms);
        t.filter = vit.filter;
        pred = vit.prediction;
    } else {
        pred = schmm::predict_from_state(t.model, t.filter.last_state);
    }

    obs.dropout = pred.dropout;
    obs.predicted_ms = pred.delay_ms;
    t.latest_send_step = std::max(t.latest_send_step, frame.send_step);
    if (pred.dropout) return obs;  // keep rolling the previous estimate

    const auto& dyn = dynamics_[static_cast<std::size_t>(t.id)];
    const int tau_hat = std::max(1, static_cast<int>(std::ceil(pred.delay_ms / opt_.sample_period_ms)));
    t.prediction = predict_neighbor_state(frame, tau_hat, dyn);
    t.inputs = frame.planned_inputs;
    t.input_offset = tau_hat;
    t.anchored = true;

    // The history is indexed by the send step. Indexing it by the predicted
    // delay would bias the next lag estimate by the current prediction error,
    // and the incremental update would then reinforce that error.
    const int age = static_cast<int>(t.predicted_step - frame.send_step);
    Eigen::VectorXd x = frame.state;
    for (int q = 0; q <= age; ++q) {
        const auto lag = static_cast<std::size_t>(age - q);
        if (lag < t.history.size()) t.history[lag] = x;
        if (q < age) x = topology::roll_forward(dyn, x, t.inputs, 1, q);
    }
    t.aligned = x;
    t.aligned_offset = age;
    return obs;
}

StepOutput AgentRuntime::step(const std::vector<netsim::PacketFrame>& delivered, long k) {
    if (!gain_) throw ConfigError("gain", "agent " + std::to_string(id_) + " has no certified gain");

    StepOutput out;
    StepTelemetry& tel = out.telemetry;
    advance_predictions(k);

    // Freshest frame per sender; older or repeated frames are ignored.
    std::map<int, const netsim::PacketFrame*> freshest;
    for (const auto& f : delivered) {
        auto& slot = freshest[f.sender];
        if (!slot || f.send_step > slot->send_step) slot = &f;
    }
    for (auto& t : tracks_) {
        const auto it = freshest.find(t.id);
        if (it == freshest.end() || it->second->send_step <= t.latest_send_step) continue;
        tel.observations.push_back(absorb(t, *it->second, tel.warnings));
    }

    // Local consensus point and the stacked state seen by this agent, taken
    // relative to delta_i so that row block i of A_e X is exactly e_i and a
    // common offset of all agents produces no input. Non-neighbors stay zero.
    const int n = static_cast<int>(x_.size());
    std::vector<Eigen::VectorXd> predicted;
    for (const auto& t : tracks_) predicted.push_back(t.prediction);
    tel.state = x_;
    tel.delta = topology::local_consensus_point(x_, predicted);
    tel.error_norm = topology::restricted_norm(topology::consensus_error(x_, tel.delta), translational_);

    Eigen::VectorXd X = Eigen::VectorXd::Zero(n * n_agents_);
    X.segment(id_ * n, n) = x_ - tel.delta;
    for (const auto& t : tracks_) X.segment(t.id * n, n) = t.prediction - tel.delta;

    const Eigen::VectorXd E = gain_->A_e * X;
    const lmpc::HorizonPlan plan = lmpc::plan_horizon(*gain_, E, opt_.N_max, opt_.v_ratio);
    const int m = static_cast<int>(gain_->K.rows()) / n_agents_;
    tel.V = plan.V;
    tel.alpha = lmpc::min_alpha(E, gain_->P_v);
    tel.J = plan.cost;
    tel.horizon = plan.horizon;

    planned_.clear();
    for (int p = 0; p < plan.horizon; ++p) planned_.push_back(plan.inputs[static_cast<std::size_t>(p)].segment(id_ * m, m));
    out.input = planned_.front();
    tel.input = out.input;

    out.frame.sender = id_;
    out.frame.send_step = k;
    out.frame.state = x_;
    out.frame.planned_inputs = planned_;

    const auto& dyn = dynamics_[static_cast<std::size_t>(id_)];
    x_ = dyn.A * x_ + dyn.B * out.input;
    if (!x_.allFinite()) {
        throw DivergenceError(k, "agent " + std::to_string(id_) + " state became non-finite at step " + std::to_string(k));
    }
    return out;
}

}  // namespace hmmpc::runtime
