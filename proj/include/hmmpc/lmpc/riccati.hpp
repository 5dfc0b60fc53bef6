#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hmmpc::lmpc {

enum class DareMethod {
    Doubling,    ///< structure-preserving doubling, then fixed-point polish
    FixedPoint,  ///< plain value iteration from `initial`
};

struct DareOptions {
    DareMethod method = DareMethod::Doubling;
    double tol = 1e-10;  ///< relative residual ||F(P) - P||_F / max(1, ||P||_F)
    int max_doubling_iters = 100;
    int max_fixed_point_iters = 200000;
    Eigen::MatrixXd initial;  ///< FixedPoint start; zero when empty
};

struct DareSolution {
    Eigen::MatrixXd P;
    int doubling_iterations = 0;
    int fixed_point_iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;  ///< one entry per iteration of either phase
};

/// One application of the Riccati map
/// F(P) = A'PA - A'PB (R + B'PB)^-1 B'PA + Q.
Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

double riccati_residual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Stabilizing solution of the discrete algebraic Riccati equation P = F(P).
/// Throws SynthesisError (with the residual trace in the message) when the
/// iteration diverges or does not reach `tol`.
DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R, const DareOptions& options = {});

}  // namespace hmmpc::lmpc
