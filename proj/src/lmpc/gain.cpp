#include "hmmpc/lmpc/gain.hpp"

#include "hmmpc/error.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace hmmpc::lmpc {

namespace {

double max_symmetric_eig(const Eigen::MatrixXd& M) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_symmetric_eig(const Eigen::MatrixXd& M) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& M) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
    return 0.5 * (inv + inv.transpose());
}

}  // namespace

CostWeights CostWeights::defaults(int n, int m) {
    CostWeights w;
    w.P = Eigen::MatrixXd::Identity(n, n);
    w.Q = Eigen::MatrixXd::Identity(m, m);
    return w;
}

Eigen::MatrixXd block_expand(const Eigen::MatrixXd& W, int n_agents) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(W.rows() * n_agents, W.cols() * n_agents);
    for (int i = 0; i < n_agents; ++i) out.block(i * W.rows(), i * W.cols(), W.rows(), W.cols()) = W;
    return out;
}

double spectral_radius(const Eigen::MatrixXd& M) {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

GainSolution synthesize_gain(const topology::CompactSystem& c, const CostWeights& w) {
    const int N = c.n_agents;
    if (w.P.rows() != c.n || w.Q.rows() != c.m) throw DomainError("cost weights do not match agent dimensions");

    GainSolution g;
    // A_hat = A_e A_c A_e^-1, computed as (A_e^-T (A_e A_c)^T)^T.
    const Eigen::MatrixXd AeAc = c.A_e * c.A_c;
    g.A_hat = c.A_e.transpose().partialPivLu().solve(AeAc.transpose()).transpose();
    g.A_e = c.A_e;
    g.B_hat = c.A_e * c.B_c;
    g.P_J = block_expand(w.P, N);
    g.Q_J = block_expand(w.Q, N);

    const DareSolution dare = solve_dare(g.A_hat, g.B_hat, g.P_J, g.Q_J, w.dare);
    g.riccati_doubling_iterations = dare.doubling_iterations;
    g.riccati_fixed_point_iterations = dare.fixed_point_iterations;
    g.riccati_residual = dare.residual;

    const Eigen::MatrixXd& P = dare.P;
    const Eigen::MatrixXd S = g.Q_J + g.B_hat.transpose() * P * g.B_hat;
    g.K = -S.ldlt().solve(g.B_hat.transpose() * P * g.A_hat);
    g.A_cl = g.A_hat + g.B_hat * g.K;

    g.epsilon = w.epsilon;
    g.alpha = w.alpha0;
    g.P_v = w.lyapunov == LyapunovWeight::Riccati ? P : w.P_v;
    if (g.P_v.rows() != c.n * N || g.P_v.cols() != c.n * N) throw DomainError("P_v has wrong shape");

    g.spectral_radius = spectral_radius(g.A_cl);
    if (!(g.spectral_radius < 1.0)) {
        std::ostringstream os;
        os << "agent " << c.agent << ": closed loop is not Schur stable (spectral radius " << g.spectral_radius << ")";
        throw CertificateError(os.str());
    }

    const Eigen::Index dim = g.P_v.rows();
    g.delta_v_max_eig = max_symmetric_eig(g.A_cl.transpose() * g.P_v * g.A_cl - g.P_v +
                                          w.epsilon * Eigen::MatrixXd::Identity(dim, dim));
    if (!(g.delta_v_max_eig < 0.0)) {
        std::ostringstream os;
        os << "agent " << c.agent << ": Lyapunov decrease test failed, largest eigenvalue " << g.delta_v_max_eig;
        throw CertificateError(os.str());
    }

    g.Omega = spd_inverse(g.P_v);
    g.Pi = g.K * g.Omega;
    g.reconstruction_error = (g.K - g.Pi * spd_inverse(g.Omega)).norm();
    if (!(g.reconstruction_error < 1e-8)) {
        std::ostringstream os;
        os << "agent " << c.agent << ": K differs from Pi Omega^-1 by " << g.reconstruction_error;
        throw CertificateError(os.str());
    }

    g.lmi2_margin = check_lmi_2(g.A_hat, g.B_hat, g.K, g.Omega).margin;
    return g;
}

LmiCheck check_lmi_1(const Eigen::VectorXd& E, const Eigen::MatrixXd& P_v, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    const Eigen::Index n = E.size();
    Eigen::MatrixXd M(n + 1, n + 1);
    M(0, 0) = 1.0;
    M.block(0, 1, 1, n) = E.transpose();
    M.block(1, 0, n, 1) = E;
    M.block(1, 1, n, n) = alpha * spd_inverse(P_v);
    LmiCheck r;
    r.margin = min_symmetric_eig(M);
    r.feasible = r.margin >= -1e-10;
    return r;
}

double min_alpha(const Eigen::VectorXd& E, const Eigen::MatrixXd& P_v) { return E.dot(P_v * E); }

LmiCheck check_lmi_2(const Eigen::MatrixXd& A_hat, const Eigen::MatrixXd& B_hat, const Eigen::MatrixXd& K,
                     const Eigen::MatrixXd& Omega) {
    const Eigen::MatrixXd A_cl = A_hat + B_hat * K;
    const Eigen::MatrixXd W = spd_inverse(Omega);
    const Eigen::MatrixXd M = A_cl.transpose() * W * A_cl - W + Eigen::MatrixXd::Identity(W.rows(), W.cols());
    LmiCheck r;
    r.margin = max_symmetric_eig(M);
    r.feasible = r.margin < 0.0;
    return r;
}

LmiCheck check_lmi_2(const topology::CompactSystem& c, const Eigen::MatrixXd& K, const Eigen::MatrixXd& Omega) {
    const Eigen::MatrixXd A_hat =
        c.A_e.transpose().partialPivLu().solve((c.A_e * c.A_c).transpose()).transpose();
    return check_lmi_2(A_hat, c.A_e * c.B_c, K, Omega);
}

std::string format_certificate(int agent, const GainSolution& g) {
    std::ostringstream os;
    os.precision(17);
    os << "agent: " << agent << '\n'
       << "spectral_radius: " << g.spectral_radius << '\n'
       << "delta_v_max_eig: " << g.delta_v_max_eig << '\n'
       << "epsilon: " << g.epsilon << '\n'
       << "lmi2_margin: " << g.lmi2_margin << '\n'
       << "alpha: " << g.alpha << '\n'
       << "reconstruction_error: " << g.reconstruction_error << '\n'
       << "riccati_doubling_iterations: " << g.riccati_doubling_iterations << '\n'
       << "riccati_fixed_point_iterations: " << g.riccati_fixed_point_iterations << '\n'
       << "riccati_residual: " << g.riccati_residual << '\n';
    return os.str();
}

}  // namespace hmmpc::lmpc
