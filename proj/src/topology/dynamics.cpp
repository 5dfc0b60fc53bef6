#include "hmmpc/topology/dynamics.hpp"

#include "hmmpc/error.hpp"

#include <algorithm>
#include <cmath>

namespace hmmpc::topology {

void AgentDynamics::validate() const {
    if (A.rows() == 0 || A.rows() != A.cols()) throw DomainError("A must be square and non-empty");
    if (B.rows() != A.rows() || B.cols() == 0) throw DomainError("B must have as many rows as A");
    for (int idx : translational) {
        if (idx < 0 || idx >= A.rows()) throw DomainError("translational index out of range");
    }
}

AgentDynamics double_integrator_3d(double dt, double input_gain) {
    if (!(dt > 0.0)) throw DomainError("sampling period must be positive");
    Eigen::MatrixXd G(3, 4);
    G.leftCols(3).setIdentity();
    G.col(3).setConstant(1.0 / std::sqrt(3.0));

    AgentDynamics d;
    d.A = Eigen::MatrixXd::Identity(6, 6);
    d.A.topRightCorner(3, 3) = dt * Eigen::MatrixXd::Identity(3, 3);
    d.B.resize(6, 4);
    d.B.topRows(3) = 0.5 * dt * dt * G;
    d.B.bottomRows(3) = dt * G;
    d.B *= input_gain;
    d.translational = {0, 1, 2};
    return d;
}

Eigen::VectorXd roll_forward(const AgentDynamics& dyn, const Eigen::VectorXd& x0,
                             const std::vector<Eigen::VectorXd>& inputs, int steps, int input_offset) {
    Eigen::VectorXd x = x0;
    for (int k = 0; k < steps; ++k) {
        x = dyn.A * x;
        if (!inputs.empty()) {
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(input_offset + k), inputs.size() - 1);
            x += dyn.B * inputs[idx];
        }
    }
    return x;
}

}  // namespace hmmpc::topology
