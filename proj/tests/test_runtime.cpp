#include "hmmpc/error.hpp"
#include "hmmpc/runtime/agent.hpp"
#include "hmmpc/runtime/metrics.hpp"
#include "hmmpc/runtime/result_io.hpp"
#include "hmmpc/runtime/simulation.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hmmpc;
using namespace hmmpc::runtime;

namespace {

/// One Gaussian at `mu` ms with the given dropout weight.
schmm::SchmmModel point_model(double mu, double dropout_weight) {
    schmm::SchmmModel m;
    m.n_states = 1;
    m.n_mixtures = 2;
    m.pi = Eigen::VectorXd::Ones(1);
    m.trans = Eigen::MatrixXd::Ones(1, 1);
    m.mix = (Eigen::MatrixXd(1, 2) << 1.0 - dropout_weight, dropout_weight).finished();
    m.mu = Eigen::Vector2d(mu, schmm::kDefaultMask);
    m.sigma = Eigen::Vector2d(1.0, schmm::kDiracSigma);
    return m;
}

Scenario scenario(const topology::Topology& g, long steps) {
    Scenario s;
    s.topology = g;
    s.dynamics.assign(static_cast<std::size_t>(g.n_agents()), topology::double_integrator_3d(0.01, 10.0));
    s.weights = lmpc::CostWeights::defaults(6, 4);
    s.agent_model = point_model(10.0, 0.01);
    s.channel = netsim::constant_delay(10.0);
    s.runtime.learn = false;
    s.steps = steps;
    s.seed = 3;
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST(PredictNeighbor, RollsWithHeldInputs) {
    topology::AgentDynamics d;
    d.A = Eigen::MatrixXd::Ones(1, 1);
    d.B = Eigen::MatrixXd::Ones(1, 1);
    netsim::PacketFrame f;
    f.state = Eigen::VectorXd::Zero(1);
    f.planned_inputs.assign(3, Eigen::VectorXd::Ones(1));
    EXPECT_EQ(predict_neighbor_state(f, 0, d)[0], 0.0);
    EXPECT_EQ(predict_neighbor_state(f, 2, d)[0], 2.0);
    EXPECT_EQ(predict_neighbor_state(f, 5, d)[0], 5.0);
    EXPECT_THROW(predict_neighbor_state(f, -1, d), DomainError);
}

TEST(Agent, ConsensusFixedPoint) {
    auto s = scenario(topology::ring_graph(4), 50);
    const Eigen::VectorXd v = (Eigen::VectorXd(6) << 1.0, -2.0, 0.5, 0.0, 0.0, 0.0).finished();
    s.initial_states.assign(4, v);
    const auto r = run_simulation(s);
    for (const auto& step : r.inputs)
        for (const auto& u : step) EXPECT_EQ(u.norm(), 0.0);
    for (const auto& step : r.states)
        for (const auto& x : step) EXPECT_EQ(x, v);
}

TEST(Agent, LoneAgentStaysPut) {
    auto s = scenario(topology::complete_graph(1), 20);
    const auto r = run_simulation(s);
    for (long k = 0; k < 20; ++k) {
        EXPECT_EQ(r.inputs[static_cast<std::size_t>(k)][0].norm(), 0.0);
        EXPECT_EQ(r.deltas[static_cast<std::size_t>(k)][0], r.states[static_cast<std::size_t>(k)][0]);
    }
}

TEST(Agent, MissingGainIsAConfigurationError) {
    const auto g = topology::path_graph(2);
    const auto dyn = topology::double_integrator_3d(0.01, 10.0);
    AgentRuntime a(0, g, {dyn, dyn}, nullptr, point_model(10.0, 0.1),
                   {Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6)}, {});
    EXPECT_THROW(a.step({}, 0), ConfigError);
}

TEST(Agent, PredictedDropoutKeepsTheStaleEstimate) {
    const auto g = topology::path_graph(2);
    auto s = scenario(g, 1);
    const auto gains = synthesize_all(s);
    const std::vector<Eigen::VectorXd> x0{Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6)};
    // The dropout component dominates, so every prediction is "dropped".
    AgentRuntime a(0, g, s.dynamics, gains[0], point_model(10.0, 0.9), x0, {});
    a.step({}, 0);

    netsim::PacketFrame f;
    f.sender = 1;
    f.send_step = 0;
    f.state = 5.0 * Eigen::VectorXd::Ones(6);
    const auto out = a.step({f}, 1);
    ASSERT_EQ(out.telemetry.observations.size(), 1u);
    EXPECT_TRUE(out.telemetry.observations[0].dropout);
    const auto& t = a.track(1);
    EXPECT_FALSE(t.anchored);
    EXPECT_EQ(t.prediction, x0[1]);
    EXPECT_EQ(t.latest_send_step, 0);
}

TEST(Agent, FreshFrameReanchorsThePrediction) {
    const auto g = topology::path_graph(2);
    auto s = scenario(g, 1);
    const auto gains = synthesize_all(s);
    const std::vector<Eigen::VectorXd> x0{Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6)};
    AgentRuntime a(0, g, s.dynamics, gains[0], point_model(20.0, 0.01), x0, {});
    a.step({}, 0);

    netsim::PacketFrame f;
    f.sender = 1;
    f.send_step = 0;
    f.state = 5.0 * Eigen::VectorXd::Ones(6);
    a.step({f}, 1);
    const auto& t = a.track(1);
    EXPECT_TRUE(t.anchored);
    // 20 ms at 10 ms per step: the frame is rolled two steps with zero inputs.
    EXPECT_EQ(t.prediction, topology::roll_forward(s.dynamics[1], f.state, {}, 2));

    // An older frame arriving later is ignored.
    netsim::PacketFrame old = f;
    old.send_step = -1;
    EXPECT_TRUE(a.step({old}, 2).telemetry.observations.empty());
}

TEST(Agent, LagEstimateIgnoresThePredictionError) {
    // The neighbor's frames always take 3 steps while the model predicts 5.
    const auto g = topology::path_graph(2);
    auto s = scenario(g, 1);
    const auto gains = synthesize_all(s);
    const auto& dyn = s.dynamics[1];
    const std::vector<Eigen::VectorXd> x0{Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6)};
    RuntimeOptions opt;
    opt.learn = false;
    AgentRuntime a(0, g, s.dynamics, gains[0], point_model(50.0, 0.01), x0, opt);

    const std::vector<Eigen::VectorXd> plan(30, Eigen::VectorXd::Ones(4));
    std::vector<Eigen::VectorXd> truth{x0[1]};
    for (int k = 0; k < 20; ++k) truth.push_back(dyn.A * truth.back() + dyn.B * plan.front());

    int checked = 0;
    for (long k = 0; k < 14; ++k) {
        std::vector<netsim::PacketFrame> delivered;
        if (k >= 3) {
            netsim::PacketFrame f;
            f.sender = 1;
            f.send_step = k - 3;
            f.state = truth[static_cast<std::size_t>(k - 3)];
            f.planned_inputs = plan;
            delivered.push_back(f);
        }
        const auto out = a.step(delivered, k);
        if (k < 4) continue;  // the first frame lands on a flat history
        ASSERT_EQ(out.telemetry.observations.size(), 1u);
        EXPECT_EQ(out.telemetry.observations[0].lag, 3) << "step " << k;
        EXPECT_EQ(out.telemetry.observations[0].predicted_ms, 50.0);
        ++checked;
    }
    EXPECT_EQ(checked, 10);
    // The control estimate uses the predicted delay, the history the true age.
    EXPECT_EQ(a.track(1).history[0], truth[13]);
}

TEST(Simulation, ExactPredictionsReachConsensus) {
    const auto r = run_simulation(scenario(topology::complete_graph(4), 2500));
    for (double e : r.error_norm.back()) EXPECT_LT(e, 1e-6);
}

TEST(Simulation, SeriesLengthsMatchStepCount) {
    const auto r = run_simulation(scenario(topology::ring_graph(3), 37));
    EXPECT_EQ(r.states.size(), 37u);
    EXPECT_EQ(r.inputs.size(), 37u);
    EXPECT_EQ(r.error_norm.size(), 37u);
    EXPECT_EQ(r.delta_max.size(), 37u);
    EXPECT_EQ(r.V.size(), 37u);
    for (const auto& row : r.states) EXPECT_EQ(row.size(), 3u);
}

TEST(Simulation, CostBoundAlongTheRun) {
    auto s = scenario(topology::ring_graph(5), 400);
    s.agent_model = schmm::reference_model();
    s.channel = netsim::model_sampler(schmm::reference_model(), 9);
    s.runtime.learn = true;
    const auto r = run_simulation(s);
    for (std::size_t k = 0; k < r.J.size(); ++k)
        for (std::size_t i = 0; i < r.J[k].size(); ++i) EXPECT_LE(r.J[k][i], r.V[k][i] + 1e-8);
}

TEST(Simulation, DeterministicOutputFiles) {
    auto s = scenario(topology::ring_graph(4), 150);
    s.agent_model = schmm::reference_model();
    s.channel = netsim::model_sampler(schmm::reference_model(), 2);
    s.runtime.learn = true;
    s.snapshot_interval = 50;
    const auto base = std::filesystem::temp_directory_path() / "hmmpc_runtime_determinism";
    std::filesystem::remove_all(base);
    write_result(run_simulation(s), base / "a");
    write_result(run_simulation(s), base / "b");
    for (const char* f : {"states.csv", "inputs.csv", "errors.csv", "delays.csv", "channel.csv", "delta_max.csv",
                          "gains.txt", "models/agent0_neighbor1_step150.model"}) {
        EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
    }
    std::filesystem::remove_all(base);
}

TEST(ResultIo, ReadBackMatchesWrittenSeries) {
    auto s = scenario(topology::path_graph(3), 60);
    s.channel = netsim::model_sampler(schmm::reference_model(), 4);
    const auto r = run_simulation(s);
    const auto dir = std::filesystem::temp_directory_path() / "hmmpc_result_io";
    std::filesystem::remove_all(dir);
    write_result(r, dir);
    const auto back = read_result(dir);
    EXPECT_EQ(back.error_norm, r.error_norm);
    EXPECT_EQ(back.V, r.V);
    EXPECT_EQ(back.delta_max, r.delta_max);
    EXPECT_EQ(back.horizon, r.horizon);
    EXPECT_EQ(back.translational, r.translational);
    EXPECT_EQ(back.sample_period_ms, r.sample_period_ms);
    ASSERT_EQ(back.delays.size(), r.delays.size());
    for (std::size_t i = 0; i < r.delays.size(); ++i) {
        EXPECT_EQ(back.delays[i].realized_ms, r.delays[i].realized_ms);
        EXPECT_EQ(back.delays[i].predicted_ms, r.delays[i].predicted_ms);
    }
    std::filesystem::remove_all(dir);
    EXPECT_THROW(read_result(dir), Error);
}

TEST(Metrics, ParameterDrift) {
    const auto a = schmm::reference_model();
    auto b = a;
    EXPECT_EQ(parameter_drift(a, b), 0.0);
    b.trans(1, 2) += 0.03;
    b.mix(0, 0) -= 0.01;
    EXPECT_NEAR(parameter_drift(a, b), 0.03, 1e-15);
    b.mu[0] += 10.0;  // means are not part of the drift measure
    EXPECT_NEAR(parameter_drift(a, b), 0.03, 1e-15);
}

TEST(Metrics, SettlingStepIsStartOfTrailingRun) {
    SimResult r;
    r.translational = {0};
    const std::vector<double> e{1.0, 0.5, 0.005, 0.02, 0.009, 0.001};
    for (double v : e) {
        r.error_norm.push_back({v});
        r.delta_max.push_back(v);
        r.states.push_back({Eigen::VectorXd::Constant(1, v)});
    }
    const auto rep = consensus_report(r);
    ASSERT_TRUE(rep.reached());
    EXPECT_EQ(*rep.settling_step, 4);
    EXPECT_NEAR(rep.final_max_ratio, 0.001, 1e-15);
}

TEST(Metrics, CompleteGraphUsesDiameterReference) {
    SimResult r;
    r.translational = {0};
    r.states.push_back({Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 2.0)});
    r.error_norm.push_back({1.0, 1.0});
    r.delta_max.push_back(0.0);
    EXPECT_EQ(consensus_report(r).delta_ref, 2.0);
}
