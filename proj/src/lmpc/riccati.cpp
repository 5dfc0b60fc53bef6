#include "hmmpc/lmpc/riccati.hpp"

#include "hmmpc/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hmmpc::lmpc {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

[[noreturn]] void fail(const std::string& reason, const std::vector<double>& history) {
    std::ostringstream os;
    os << "Riccati iteration failed: " << reason << "; residual trace:";
    const std::size_t first = history.size() > 12 ? history.size() - 12 : 0;
    if (first > 0) os << " ...";
    for (std::size_t i = first; i < history.size(); ++i) os << ' ' << history[i];
    throw SynthesisError(os.str());
}

}  // namespace

Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const Eigen::MatrixXd PA = P * A;
    const Eigen::MatrixXd BtPA = B.transpose() * PA;
    const Eigen::MatrixXd S = R + B.transpose() * P * B;
    return symmetrize(A.transpose() * PA - BtPA.transpose() * S.ldlt().solve(BtPA) + Q);
}

double riccati_residual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    return (riccati_map(P, A, B, Q, R) - P).norm() / std::max(1.0, P.norm());
}

DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R, const DareOptions& opt) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
        R.cols() != B.cols()) {
        throw DomainError("inconsistent Riccati dimensions");
    }

    DareSolution sol;
    Eigen::MatrixXd P;

    if (opt.method == DareMethod::Doubling) {
        // A_{k+1} = A_k W^-1 A_k, G_{k+1} = G_k + A_k W^-1 G_k A_k',
        // H_{k+1} = H_k + A_k' H_k W^-1 A_k with W = I + G_k H_k; H_k -> P.
        Eigen::MatrixXd Ak = A;
        Eigen::MatrixXd Gk = symmetrize(B * R.ldlt().solve(B.transpose()));
        Eigen::MatrixXd Hk = Q;
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        for (int k = 0; k < opt.max_doubling_iters; ++k) {
            const Eigen::PartialPivLU<Eigen::MatrixXd> W(I + Gk * Hk);
            const Eigen::MatrixXd WA = W.solve(Ak);
            const Eigen::MatrixXd WG = W.solve(Gk);
            const Eigen::MatrixXd H_next = symmetrize(Hk + Ak.transpose() * Hk * WA);
            Gk = symmetrize(Gk + Ak * WG * Ak.transpose());
            Ak = Ak * WA;
            const double change = (H_next - Hk).norm() / std::max(1.0, H_next.norm());
            Hk = H_next;
            ++sol.doubling_iterations;
            sol.residual_history.push_back(change);
            if (!Hk.allFinite()) fail("doubling iterate became non-finite", sol.residual_history);
            if (change < 1e-15) break;
        }
        P = Hk;
    } else {
        P = opt.initial.size() ? opt.initial : Eigen::MatrixXd::Zero(n, n);
        if (P.rows() != n || P.cols() != n) throw DomainError("initial Riccati guess has wrong shape");
    }

    // Fixed-point phase: polish the doubling result, or run the whole
    // iteration for the plain method.
    sol.residual = riccati_residual(P, A, B, Q, R);
    while (sol.residual > opt.tol) {
        if (sol.fixed_point_iterations >= opt.max_fixed_point_iters) {
            fail("no convergence after " + std::to_string(sol.fixed_point_iterations) + " fixed-point steps",
                 sol.residual_history);
        }
        P = riccati_map(P, A, B, Q, R);
        ++sol.fixed_point_iterations;
        sol.residual = riccati_residual(P, A, B, Q, R);
        sol.residual_history.push_back(sol.residual);
        if (!std::isfinite(sol.residual) || sol.residual > 1e300) fail("iterate diverged", sol.residual_history);
    }
    sol.P = P;
    return sol;
}

}  // namespace hmmpc::lmpc
