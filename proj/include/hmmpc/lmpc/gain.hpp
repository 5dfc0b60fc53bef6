#pragma once

#include "hmmpc/lmpc/riccati.hpp"
#include "hmmpc/topology/compact.hpp"

#include <Eigen/Dense>

#include <string>

namespace hmmpc::lmpc {

/// Where the Lyapunov weight P_v comes from.
enum class LyapunovWeight {
    Riccati,  ///< the stabilizing Riccati solution of the synthesis
    Fixed,    ///< CostWeights::P_v as given
};

struct CostWeights {
    Eigen::MatrixXd P;    ///< per-agent state weight (n x n)
    Eigen::MatrixXd Q;    ///< per-agent input weight (m x m)
    LyapunovWeight lyapunov = LyapunovWeight::Riccati;
    Eigen::MatrixXd P_v;  ///< nN x nN; used when lyapunov == Fixed
    int N_max = 20;
    double v_ratio = 0.1;
    double epsilon = 1e-6;
    double alpha0 = 1e-3;
    DareOptions dare;

    /// P = I_n, Q = I_m, horizon 20, ratio 0.1.
    static CostWeights defaults(int n, int m);
};

/// I_N kron W.
Eigen::MatrixXd block_expand(const Eigen::MatrixXd& W, int n_agents);

/// Feedback gain and the numbers that certify it.
struct GainSolution {
    Eigen::MatrixXd K;      ///< mN x nN
    Eigen::MatrixXd Omega;  ///< P_v^-1
    Eigen::MatrixXd Pi;     ///< K Omega
    Eigen::MatrixXd P_v;    ///< Lyapunov weight used for V(E) = E' P_v E
    Eigen::MatrixXd A_e;    ///< error map of the compact system
    Eigen::MatrixXd A_hat;  ///< A_e A_c A_e^-1
    Eigen::MatrixXd B_hat;  ///< A_e B_c
    Eigen::MatrixXd A_cl;   ///< A_hat + B_hat K
    Eigen::MatrixXd P_J;
    Eigen::MatrixXd Q_J;
    double alpha = 0.0;

    double spectral_radius = 0.0;
    double delta_v_max_eig = 0.0;    ///< max eig of A_cl' P_v A_cl - P_v + eps I
    double lmi2_margin = 0.0;        ///< max eig of A_cl' Omega^-1 A_cl - Omega^-1 + I
    double reconstruction_error = 0.0;  ///< ||K - Pi Omega^-1||_F
    int riccati_doubling_iterations = 0;
    int riccati_fixed_point_iterations = 0;
    double riccati_residual = 0.0;
    double epsilon = 0.0;
};

/**
 * @brief Riccati-based synthesis of K followed by numeric certification.
 *
 * Throws SynthesisError when the Riccati solve fails and CertificateError
 * when the closed loop is not Schur, the Lyapunov decrease test fails, or
 * K cannot be reconstructed from (Pi, Omega).
 */
GainSolution synthesize_gain(const topology::CompactSystem& compact, const CostWeights& weights);

struct LmiCheck {
    bool feasible = false;
    double margin = 0.0;
};

/// [[1, E'], [E, alpha P_v^-1]] >= 0 (min eigenvalue >= -1e-10), i.e. E' P_v E <= alpha.
LmiCheck check_lmi_1(const Eigen::VectorXd& E, const Eigen::MatrixXd& P_v, double alpha);

/// E' P_v E, the smallest alpha accepted by check_lmi_1.
double min_alpha(const Eigen::VectorXd& E, const Eigen::MatrixXd& P_v);

/// Decrease condition in Omega^-1 coordinates: max eig of
/// A_cl' Omega^-1 A_cl - Omega^-1 + I must be negative.
LmiCheck check_lmi_2(const Eigen::MatrixXd& A_hat, const Eigen::MatrixXd& B_hat, const Eigen::MatrixXd& K,
                     const Eigen::MatrixXd& Omega);
LmiCheck check_lmi_2(const topology::CompactSystem& compact, const Eigen::MatrixXd& K, const Eigen::MatrixXd& Omega);

/// max |eig(M)| for a general square matrix.
double spectral_radius(const Eigen::MatrixXd& M);

/// One line per field, "key: value", for the per-agent certificate report.
std::string format_certificate(int agent, const GainSolution& gain);

}  // namespace hmmpc::lmpc
