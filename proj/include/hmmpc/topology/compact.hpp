#pragma once

#include "hmmpc/topology/dynamics.hpp"
#include "hmmpc/topology/graph.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hmmpc::topology {

/// Block-diagonal stacking of every agent's dynamics.
struct GlobalSystem {
    Eigen::MatrixXd A_m;
    Eigen::MatrixXd B_m;
};

GlobalSystem build_global(const std::vector<AgentDynamics>& agents);

/// Agent i's view of the global system: rows and columns of agents outside
/// its neighbor set are zeroed, and A_e maps stacked states to errors.
struct CompactSystem {
    int agent = 0;
    int n = 0;
    int m = 0;
    int n_agents = 0;
    Eigen::MatrixXd A_c;
    Eigen::MatrixXd B_c;
    Eigen::MatrixXd A_e;
    double theta = 0.99;
};

/// Row-stochastic neighborhood averaging matrix: C(j, l) = 1 / card(N_j) for l in N_j.
Eigen::MatrixXd averaging_matrix(const Topology& topology);

/// (I_N - theta C) kron I_n. Throws DomainError unless 0 < theta < 1.
Eigen::MatrixXd build_error_map(const Topology& topology, int n, double theta);

CompactSystem build_compact(const Topology& topology, const GlobalSystem& global, int agent, int n, int m,
                            double theta = 0.99);

/// (x_i + sum of predicted neighbor states) / card(N_i).
Eigen::VectorXd local_consensus_point(const Eigen::VectorXd& x_i, const std::vector<Eigen::VectorXd>& predicted);

inline Eigen::VectorXd consensus_error(const Eigen::VectorXd& x_i, const Eigen::VectorXd& delta_i) {
    return x_i - delta_i;
}

/// Largest pairwise distance between consensus points over the given coordinates.
double delta_max(const std::vector<Eigen::VectorXd>& deltas, const std::vector<int>& coordinates);

/// Norm of v restricted to the given coordinates (all of v when empty).
double restricted_norm(const Eigen::VectorXd& v, const std::vector<int>& coordinates);

}  // namespace hmmpc::topology
