#include "hmmpc/runtime/simulation.hpp"

#include "hmmpc/error.hpp"
#include "hmmpc/netsim/channel.hpp"

#include <map>
#include <random>
#include <sstream>

namespace hmmpc::runtime {

std::vector<Eigen::VectorXd> random_initial_states(int n_agents, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> randn(0.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < n_agents; ++i) {
        Eigen::VectorXd x(n);
        for (int c = 0; c < n; ++c) x[c] = randn(rng);
        out.push_back(x);
    }
    return out;
}

std::vector<std::shared_ptr<const lmpc::GainSolution>> synthesize_all(const Scenario& s) {
    const auto global = topology::build_global(s.dynamics);
    const int n = s.dynamics.front().n();
    const int m = s.dynamics.front().m();
    std::vector<std::shared_ptr<const lmpc::GainSolution>> gains;
    for (int i = 0; i < s.topology.n_agents(); ++i) {
        const auto compact = topology::build_compact(s.topology, global, i, n, m, s.theta);
        gains.push_back(std::make_shared<const lmpc::GainSolution>(lmpc::synthesize_gain(compact, s.weights)));
    }
    return gains;
}

SimResult run_simulation(const Scenario& s) {
    const int N = s.topology.n_agents();
    if (static_cast<int>(s.dynamics.size()) != N) throw DomainError("need one dynamics entry per agent");
    if (s.steps < 1) throw DomainError("simulation needs at least one step");
    const int n = s.dynamics.front().n();

    SimResult res;
    res.steps = s.steps;
    res.n_agents = N;
    res.sample_period_ms = s.runtime.sample_period_ms;
    res.translational = s.dynamics.front().translational;
    res.gains = synthesize_all(s);

    const auto x0 = s.initial_states.empty() ? random_initial_states(N, n, s.seed) : s.initial_states;
    if (static_cast<int>(x0.size()) != N) throw DomainError("need one initial state per agent");

    std::vector<AgentRuntime> agents;
    agents.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        agents.emplace_back(i, s.topology, s.dynamics, res.gains[static_cast<std::size_t>(i)], s.agent_model, x0,
                            s.runtime);
    }
    netsim::Channel channel(s.topology, s.channel, s.runtime.sample_period_ms, s.mask);

    // (sender, receiver, send_step) -> predicted delay of that frame at the receiver.
    std::map<std::tuple<int, int, long>, double> predictions;
    std::ostringstream stats;

    auto snapshot = [&](long step) {
        for (const auto& a : agents)
            for (const auto& t : a.tracks()) res.snapshots.push_back({step, a.id(), t.id, t.model});
    };
    snapshot(0);

    for (long k = 0; k < s.steps; ++k) {
        std::vector<std::vector<netsim::PacketFrame>> inbox(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) inbox[static_cast<std::size_t>(i)] = channel.deliver(k, i);

        std::vector<netsim::PacketFrame> outbox;
        auto& states = res.states.emplace_back();
        auto& inputs = res.inputs.emplace_back();
        auto& deltas = res.deltas.emplace_back();
        auto& err = res.error_norm.emplace_back();
        auto& V = res.V.emplace_back();
        auto& alpha = res.alpha.emplace_back();
        auto& J = res.J.emplace_back();
        auto& hor = res.horizon.emplace_back();
        for (int i = 0; i < N; ++i) {
            StepOutput o = agents[static_cast<std::size_t>(i)].step(inbox[static_cast<std::size_t>(i)], k);
            const StepTelemetry& t = o.telemetry;
            states.push_back(t.state);
            inputs.push_back(t.input);
            deltas.push_back(t.delta);
            err.push_back(t.error_norm);
            V.push_back(t.V);
            alpha.push_back(t.alpha);
            J.push_back(t.J);
            hor.push_back(t.horizon);
            for (const auto& ob : t.observations) {
                predictions[{ob.sender, i, ob.send_step}] = ob.dropout ? s.mask : ob.predicted_ms;
            }
            for (auto& w : o.telemetry.warnings) res.warnings.push_back(std::move(w));
            outbox.push_back(std::move(o.frame));
        }
        res.delta_max.push_back(topology::delta_max(deltas, res.translational));

        for (const auto& f : outbox)
            for (int r : s.topology.neighbors(f.sender)) channel.send(f, r);
        channel.write_stats(stats, k);

        const long done = k + 1;
        if (done == s.steps || (s.snapshot_interval > 0 && done % s.snapshot_interval == 0)) snapshot(done);
    }

    for (const auto& rec : channel.log()) {
        DelayRecord d;
        d.send_step = rec.send_step;
        d.sender = rec.sender;
        d.receiver = rec.receiver;
        d.realized_ms = rec.delay_ms;
        d.dropped = rec.dropped;
        if (const auto it = predictions.find({rec.sender, rec.receiver, rec.send_step}); it != predictions.end()) {
            d.predicted_ms = it->second;
        }
        res.delays.push_back(d);
    }
    res.channel_stats_csv = stats.str();
    return res;
}

}  // namespace hmmpc::runtime
