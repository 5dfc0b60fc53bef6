#include "hmmpc/error.hpp"
#include "hmmpc/topology/compact.hpp"
#include "hmmpc/topology/dynamics.hpp"
#include "hmmpc/topology/graph.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hmmpc;
using namespace hmmpc::topology;

namespace {

// Agent 0 talks to both others; 1 and 2 only to agent 0.
Topology star3() { return Topology::from_edges(3, {{0, 1}, {0, 2}}); }

AgentDynamics scalar_integrator() {
    AgentDynamics d;
    d.A = Eigen::MatrixXd::Ones(1, 1);
    d.B = Eigen::MatrixXd::Ones(1, 1);
    return d;
}

AgentDynamics tagged(double a) {
    AgentDynamics d;
    d.A = Eigen::MatrixXd::Constant(2, 2, a);
    d.B = Eigen::MatrixXd::Constant(2, 1, a + 0.5);
    return d;
}

}  // namespace

TEST(Graph, NeighborSetsIncludeSelf) {
    const auto g = star3();
    EXPECT_EQ(g.neighbor_set(0), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(g.neighbor_set(1), (std::vector<int>{0, 1}));
    EXPECT_EQ(g.neighbors(1), (std::vector<int>{0}));
    EXPECT_EQ(g.cardinality(0), 3);
    EXPECT_TRUE(g.contains(2, 2));
    EXPECT_FALSE(g.contains(1, 2));
}

TEST(Graph, LaplacianRowsSumToZero) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = random_connected_graph(2 + static_cast<int>(seed % 9), 0.3, seed);
        const Eigen::MatrixXd L = g.laplacian();
        EXPECT_LT(L.rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_TRUE(L.isApprox(L.transpose()));
    }
}

TEST(Graph, ValidatesStructure) {
    EXPECT_THROW(Topology::from_edges(3, {{0, 1}}), InvariantError);   // disconnected
    EXPECT_THROW(Topology::from_edges(2, {{0, 0}}), InvariantError);   // self-loop
    Eigen::MatrixXi a(2, 2);
    a << 0, 1, 0, 0;
    EXPECT_THROW(Topology::from_adjacency(a), InvariantError);         // asymmetric
    a << 0, 2, 2, 0;
    EXPECT_THROW(Topology::from_adjacency(a), InvariantError);         // weighted
}

TEST(Graph, Generators) {
    EXPECT_TRUE(complete_graph(5).is_complete());
    EXPECT_FALSE(ring_graph(5).is_complete());
    EXPECT_EQ(path_graph(4).edges().size(), 3u);
    EXPECT_EQ(complete_graph(1).n_agents(), 1);
    const auto a = random_connected_graph(7, 0.2, 9);
    const auto b = random_connected_graph(7, 0.2, 9);
    EXPECT_EQ(a.adjacency(), b.adjacency());
}

TEST(GraphIo, ParseAndFormatRoundTrip) {
    const auto g = parse_graph("# tree\n0 1\n0 2  # hub\n\n1 3\n");
    EXPECT_EQ(g.n_agents(), 4);
    EXPECT_EQ(parse_graph(format_graph(g)).adjacency(), g.adjacency());
}

TEST(GraphIo, ErrorsCarryLineNumbers) {
    try {
        parse_graph("0 1\n1 x\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_graph("0 1\n2 3\n"), InvariantError);
}

TEST(Global, BlockDiagonalInAgentOrder) {
    const auto g = build_global({tagged(1.0), tagged(2.0), tagged(3.0)});
    ASSERT_EQ(g.A_m.rows(), 6);
    ASSERT_EQ(g.B_m.cols(), 3);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(g.A_m.block(2 * i, 2 * i, 2, 2), tagged(i + 1.0).A);
        EXPECT_EQ(g.B_m.block(2 * i, i, 2, 1), tagged(i + 1.0).B);
    }
    EXPECT_EQ(g.A_m.block(0, 2, 2, 4).cwiseAbs().sum(), 0.0);

    const auto one = build_global({tagged(4.0)});
    EXPECT_EQ(one.A_m, tagged(4.0).A);
    EXPECT_THROW(build_global({tagged(1.0), scalar_integrator()}), DomainError);
}

TEST(Compact, ZeroBlocksFollowNeighborSets) {
    const auto dyn = std::vector<AgentDynamics>{tagged(1.0), tagged(2.0), tagged(3.0)};
    const auto global = build_global(dyn);
    const auto g = star3();

    const auto leaf = build_compact(g, global, 1, 2, 1);
    EXPECT_EQ(leaf.A_c.block(0, 0, 2, 2), dyn[0].A);
    EXPECT_EQ(leaf.A_c.block(2, 2, 2, 2), dyn[1].A);
    EXPECT_EQ(leaf.A_c.block(4, 4, 2, 2).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(leaf.B_c.block(4, 2, 2, 1).cwiseAbs().sum(), 0.0);

    const auto hub = build_compact(g, global, 0, 2, 1);
    EXPECT_EQ(hub.A_c, global.A_m);
    EXPECT_EQ(hub.B_c, global.B_m);
}

TEST(Compact, RandomGraphStructure) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const int N = 2 + static_cast<int>(seed % 6);
        const auto g = random_connected_graph(N, 0.25, seed);
        const auto global = build_global(std::vector<AgentDynamics>(static_cast<std::size_t>(N), tagged(1.0)));
        for (int i = 0; i < N; ++i) {
            const auto c = build_compact(g, global, i, 2, 1);
            for (int j = 0; j < N; ++j) {
                const double a = c.A_c.block(2 * j, 2 * j, 2, 2).cwiseAbs().sum();
                const double b = c.B_c.block(2 * j, j, 2, 1).cwiseAbs().sum();
                if (g.contains(i, j)) {
                    EXPECT_GT(a, 0.0);
                    EXPECT_GT(b, 0.0);
                } else {
                    EXPECT_EQ(a, 0.0);
                    EXPECT_EQ(b, 0.0);
                }
            }
        }
    }
}

TEST(Compact, CompleteGraphGivesFullSystem) {
    const auto g = complete_graph(4);
    const auto global = build_global(std::vector<AgentDynamics>(4, tagged(2.0)));
    for (int i = 0; i < 4; ++i) EXPECT_EQ(build_compact(g, global, i, 2, 1).A_c, global.A_m);
}

TEST(ErrorMap, HubRowOnStar) {
    const Eigen::MatrixXd Ae = build_error_map(star3(), 1, 0.99);
    EXPECT_NEAR(Ae(0, 0), 1.0 - 0.99 / 3.0, 1e-15);
    EXPECT_NEAR(Ae(0, 1), -0.99 / 3.0, 1e-15);
    EXPECT_NEAR(Ae(0, 2), -0.99 / 3.0, 1e-15);
    EXPECT_NEAR(Ae(1, 0), -0.99 / 2.0, 1e-15);
    EXPECT_NEAR(Ae(1, 2), 0.0, 1e-15);
}

TEST(ErrorMap, KroneckerLayout) {
    const Eigen::MatrixXd Ae = build_error_map(star3(), 2, 0.5);
    EXPECT_NEAR(Ae(0, 2), -0.5 / 3.0, 1e-15);
    EXPECT_NEAR(Ae(1, 3), -0.5 / 3.0, 1e-15);
    EXPECT_EQ(Ae(0, 3), 0.0);
}

TEST(ErrorMap, RejectsThetaOutsideOpenInterval) {
    EXPECT_THROW(build_error_map(star3(), 1, 0.0), DomainError);
    EXPECT_THROW(build_error_map(star3(), 1, 1.0), DomainError);
    EXPECT_THROW(build_error_map(star3(), 1, -0.2), DomainError);
}

TEST(ErrorMap, InvertibleOnRandomGraphs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> theta(0.01, 0.999);
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const int N = 1 + static_cast<int>(seed % 12);
        const auto g = random_connected_graph(N, 0.3, seed);
        const Eigen::MatrixXd Ae = build_error_map(g, 2, theta(rng));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ae);
        EXPECT_GT(svd.singularValues().minCoeff(), 1e-6) << "graph seed " << seed;
    }
}

TEST(ErrorMap, CompleteGraphRowAgainstDirectComputation) {
    const int N = 5, n = 2;
    const double theta = 0.9;
    const auto g = complete_graph(N);
    const Eigen::MatrixXd Ae = build_error_map(g, n, theta);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> d;
    Eigen::VectorXd X(N * n);
    for (int k = 0; k < X.size(); ++k) X[k] = d(rng);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < N; ++j) mean += X.segment(j * n, n) / N;
    const Eigen::VectorXd E = Ae * X;
    for (int i = 0; i < N; ++i) {
        const Eigen::VectorXd xi = X.segment(i * n, n);
        const Eigen::VectorXd expected = theta * (xi - mean) + (1.0 - theta) * xi;
        EXPECT_LT((E.segment(i * n, n) - expected).norm(), 1e-14);
    }
}

TEST(ConsensusPoint, Examples) {
    const Eigen::VectorXd v = Eigen::Vector2d(1.5, -2.0);
    EXPECT_EQ(local_consensus_point(v, {v, v}), v);
    EXPECT_EQ(local_consensus_point(Eigen::VectorXd::Zero(1), {Eigen::VectorXd::Constant(1, 3.0),
                                                                Eigen::VectorXd::Constant(1, 6.0)})[0],
              3.0);
    EXPECT_EQ(local_consensus_point(v, {}), v);
    EXPECT_EQ(consensus_error(v, v).norm(), 0.0);
}

TEST(ConsensusPoint, DeltaMax) {
    EXPECT_EQ(delta_max({Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)}, {}), 5.0);
    EXPECT_EQ(delta_max({Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)}, {}), 0.0);
    // Only coordinate 0 counts.
    EXPECT_EQ(delta_max({Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)}, {0}), 3.0);
}

TEST(ConsensusPoint, DeltaMaxProperties) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Eigen::VectorXd> pts;
        for (int i = 0; i < 5; ++i) pts.push_back(Eigen::Vector3d(d(rng), d(rng), d(rng)));
        const double dm = delta_max(pts, {});
        EXPECT_GT(dm, 0.0);
        std::reverse(pts.begin(), pts.end());
        EXPECT_EQ(delta_max(pts, {}), dm);
    }
}

TEST(Dynamics, DoubleIntegratorShape) {
    const auto d = double_integrator_3d(0.01, 10.0);
    EXPECT_EQ(d.n(), 6);
    EXPECT_EQ(d.m(), 4);
    EXPECT_EQ(d.translational, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(d.A(0, 3), 0.01);
    EXPECT_NEAR(d.B(3, 0), 10.0 * 0.01, 1e-15);
    EXPECT_NEAR(d.B(0, 0), 10.0 * 0.5 * 0.01 * 0.01, 1e-18);
    EXPECT_NO_THROW(d.validate());
}

TEST(Dynamics, RollForwardHoldsLastInput) {
    const auto d = scalar_integrator();
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
    const std::vector<Eigen::VectorXd> u(3, Eigen::VectorXd::Ones(1));
    EXPECT_EQ(roll_forward(d, x0, u, 0)[0], 0.0);
    EXPECT_EQ(roll_forward(d, x0, u, 2)[0], 2.0);
    EXPECT_EQ(roll_forward(d, x0, u, 7)[0], 7.0);
    EXPECT_EQ(roll_forward(d, x0, {}, 4)[0], 0.0);
    const std::vector<Eigen::VectorXd> ramp{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0)};
    EXPECT_EQ(roll_forward(d, x0, ramp, 3, 1)[0], 6.0);
}
