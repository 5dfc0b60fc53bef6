#include "hmmpc/lmpc/cost.hpp"

#include "hmmpc/error.hpp"

namespace hmmpc::lmpc {

double evaluate_cost(const std::vector<Eigen::VectorXd>& errors, const std::vector<Eigen::VectorXd>& inputs,
                     const Eigen::MatrixXd& P_J, const Eigen::MatrixXd& Q_J) {
    if (errors.size() != inputs.size()) throw DomainError("error and input trajectories differ in length");
    double J = 0.0;
    for (std::size_t p = 0; p < errors.size(); ++p) {
        J += errors[p].dot(P_J * errors[p]) + inputs[p].dot(Q_J * inputs[p]);
    }
    return J;
}

int adaptive_horizon(double V0, const std::vector<double>& predicted, double v_ratio, int N_max) {
    const int limit = std::min<int>(N_max, static_cast<int>(predicted.size()));
    for (int p = 1; p <= limit; ++p) {
        if (predicted[static_cast<std::size_t>(p - 1)] <= v_ratio * V0) return p;
    }
    return N_max;
}

HorizonPlan plan_horizon(const GainSolution& gain, const Eigen::VectorXd& E, int N_max, double v_ratio) {
    if (N_max < 1) throw DomainError("horizon cap must be at least 1");
    std::vector<Eigen::VectorXd> errors{E};
    std::vector<double> predicted;
    for (int p = 1; p <= N_max; ++p) {
        errors.push_back(gain.A_cl * errors.back());
        predicted.push_back(min_alpha(errors.back(), gain.P_v));
    }

    HorizonPlan plan;
    plan.V = min_alpha(E, gain.P_v);
    plan.horizon = adaptive_horizon(plan.V, predicted, v_ratio, N_max);
    errors.resize(static_cast<std::size_t>(plan.horizon + 1));
    for (const auto& e : errors) plan.inputs.push_back(gain.K * e);
    plan.errors = std::move(errors);
    plan.cost = evaluate_cost(plan.errors, plan.inputs, gain.P_J, gain.Q_J);
    return plan;
}

}  // namespace hmmpc::lmpc
