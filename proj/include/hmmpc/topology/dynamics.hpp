#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hmmpc::topology {

/// Discrete-time linear agent x+ = A x + B u.
struct AgentDynamics {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    std::vector<int> translational;  ///< state indices that are positions

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    void validate() const;
};

/// Point mass in 3-D, positions then velocities (n = 6), driven by the three
/// axis thrusts plus one thrust along the (1,1,1) diagonal (m = 4), sampled
/// with zero-order hold at `dt` seconds.
AgentDynamics double_integrator_3d(double dt, double input_gain);

/// x+ = A x + B u for `steps` steps; input k is inputs[min(k, size-1)],
/// zero when `inputs` is empty.
Eigen::VectorXd roll_forward(const AgentDynamics& dyn, const Eigen::VectorXd& x0,
                             const std::vector<Eigen::VectorXd>& inputs, int steps, int input_offset = 0);

}  // namespace hmmpc::topology
