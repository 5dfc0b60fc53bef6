#include "hmmpc/topology/compact.hpp"

#include "hmmpc/error.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace hmmpc::topology {

GlobalSystem build_global(const std::vector<AgentDynamics>& agents) {
    if (agents.empty()) throw DomainError("no agents");
    const int n = agents.front().n();
    const int m = agents.front().m();
    for (const auto& a : agents) {
        a.validate();
        if (a.n() != n || a.m() != m) throw DomainError("all agents must share state and input dimensions");
    }
    const int N = static_cast<int>(agents.size());
    GlobalSystem g;
    g.A_m = Eigen::MatrixXd::Zero(n * N, n * N);
    g.B_m = Eigen::MatrixXd::Zero(n * N, m * N);
    for (int i = 0; i < N; ++i) {
        g.A_m.block(i * n, i * n, n, n) = agents[static_cast<std::size_t>(i)].A;
        g.B_m.block(i * n, i * m, n, m) = agents[static_cast<std::size_t>(i)].B;
    }
    return g;
}

Eigen::MatrixXd averaging_matrix(const Topology& topology) {
    const int N = topology.n_agents();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(N, N);
    for (int j = 0; j < N; ++j) {
        for (int l : topology.neighbor_set(j)) c(j, l) = 1.0 / topology.cardinality(j);
    }
    return c;
}

Eigen::MatrixXd build_error_map(const Topology& topology, int n, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie strictly between 0 and 1");
    const int N = topology.n_agents();
    const Eigen::MatrixXd small = Eigen::MatrixXd::Identity(N, N) - theta * averaging_matrix(topology);
    Eigen::MatrixXd a_e = Eigen::MatrixXd::Zero(N * n, N * n);
    for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l)
            if (small(j, l) != 0.0) a_e.block(j * n, l * n, n, n).diagonal().setConstant(small(j, l));
    return a_e;
}

CompactSystem build_compact(const Topology& topology, const GlobalSystem& global, int agent, int n, int m,
                            double theta) {
    const int N = topology.n_agents();
    if (agent < 0 || agent >= N) throw DomainError("agent index out of range");
    if (global.A_m.rows() != n * N || global.B_m.cols() != m * N) throw DomainError("global system does not match topology");

    CompactSystem c;
    c.agent = agent;
    c.n = n;
    c.m = m;
    c.n_agents = N;
    c.theta = theta;
    c.A_c = global.A_m;
    c.B_c = global.B_m;
    for (int l = 0; l < N; ++l) {
        if (topology.contains(agent, l)) continue;
        c.A_c.middleRows(l * n, n).setZero();
        c.A_c.middleCols(l * n, n).setZero();
        c.B_c.middleRows(l * n, n).setZero();
        c.B_c.middleCols(l * m, m).setZero();
    }
    c.A_e = build_error_map(topology, n, theta);

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(c.A_e);
    const Eigen::VectorXd s = svd.singularValues();
    if (!(s[s.size() - 1] > 1e-12 * s[0])) throw DomainError("error map is numerically singular");
    return c;
}

Eigen::VectorXd local_consensus_point(const Eigen::VectorXd& x_i, const std::vector<Eigen::VectorXd>& predicted) {
    Eigen::VectorXd sum = x_i;
    for (const auto& x : predicted) {
        if (x.size() != x_i.size()) throw DomainError("state dimension mismatch");
        sum += x;
    }
    return sum / static_cast<double>(predicted.size() + 1);
}

double restricted_norm(const Eigen::VectorXd& v, const std::vector<int>& coordinates) {
    if (coordinates.empty()) return v.norm();
    double s = 0.0;
    for (int c : coordinates) s += v[c] * v[c];
    return std::sqrt(s);
}

double delta_max(const std::vector<Eigen::VectorXd>& deltas, const std::vector<int>& coordinates) {
    double worst = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        for (std::size_t j = i + 1; j < deltas.size(); ++j)
            worst = std::max(worst, restricted_norm(deltas[i] - deltas[j], coordinates));
    return worst;
}

}  // namespace hmmpc::topology
