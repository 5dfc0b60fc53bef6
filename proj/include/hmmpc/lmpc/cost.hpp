#pragma once

#include "hmmpc/lmpc/gain.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hmmpc::lmpc {

/// sum_p E_p' P_J E_p + U_p' Q_J U_p over matching trajectories.
double evaluate_cost(const std::vector<Eigen::VectorXd>& errors, const std::vector<Eigen::VectorXd>& inputs,
                     const Eigen::MatrixXd& P_J, const Eigen::MatrixXd& Q_J);

/// Smallest p in 1..N_max with predicted[p-1] <= v_ratio * V0, otherwise N_max.
/// predicted[p-1] is V(E(k+p)).
int adaptive_horizon(double V0, const std::vector<double>& predicted, double v_ratio, int N_max);

/// Nominal closed-loop prediction from the current compact error.
struct HorizonPlan {
    int horizon = 0;                      ///< N_alpha
    std::vector<Eigen::VectorXd> errors;  ///< E(k+p), p = 0..N_alpha
    std::vector<Eigen::VectorXd> inputs;  ///< U(k+p) = K E(k+p), p = 0..N_alpha
    double V = 0.0;                       ///< V(E(k))
    double cost = 0.0;                    ///< J over p = 0..N_alpha
};

HorizonPlan plan_horizon(const GainSolution& gain, const Eigen::VectorXd& E, int N_max, double v_ratio);

}  // namespace hmmpc::lmpc
