#include "hmmpc/schmm/model.hpp"

#include "hmmpc/error.hpp"

#include <cmath>
#include <sstream>

namespace hmmpc::schmm {

namespace {

void check_probability_vector(const Eigen::VectorXd& v, const std::string& name) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
            std::ostringstream os;
            os << name << "[" << i << "] = " << v[i] << " is not a probability";
            throw InvariantError(os.str());
        }
    }
    if (std::abs(v.sum() - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os << name << " sums to " << v.sum();
        throw InvariantError(os.str());
    }
}

}  // namespace

void SchmmModel::validate() const {
    if (n_states < 1) throw InvariantError("n_states must be positive");
    if (n_mixtures < 2) throw InvariantError("n_mixtures must be at least 2 (one Gaussian plus the dropout component)");
    if (pi.size() != n_states) throw InvariantError("pi has wrong length");
    if (trans.rows() != n_states || trans.cols() != n_states) throw InvariantError("trans has wrong shape");
    if (mix.rows() != n_states || mix.cols() != n_mixtures) throw InvariantError("mix has wrong shape");
    if (mu.size() != n_mixtures || sigma.size() != n_mixtures) throw InvariantError("mu/sigma have wrong length");

    check_probability_vector(pi, "pi");
    for (int i = 0; i < n_states; ++i) {
        check_probability_vector(trans.row(i).transpose(), "trans row " + std::to_string(i));
        check_probability_vector(mix.row(i).transpose(), "mix row " + std::to_string(i));
    }
    for (int g = 0; g < n_mixtures; ++g) {
        if (!(sigma[g] > 0.0) || !std::isfinite(sigma[g])) {
            throw InvariantError("sigma[" + std::to_string(g) + "] must be positive and finite");
        }
        if (!std::isfinite(mu[g])) throw InvariantError("mu[" + std::to_string(g) + "] is not finite");
    }
    if (mu[dirac()] != mask) throw InvariantError("last component mean must equal the dropout mask");
}

bool SchmmModel::operator==(const SchmmModel& o) const {
    return n_states == o.n_states && n_mixtures == o.n_mixtures && mask == o.mask && pi == o.pi &&
           trans == o.trans && mix == o.mix && mu == o.mu && sigma == o.sigma;
}

void normalize_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m.row(i) /= m.row(i).sum();
    }
}

void normalize(Eigen::VectorXd& v) { v /= v.sum(); }

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& trans) {
    // Solve p^T (A - I) = 0 with sum(p) = 1 by replacing one equation.
    const Eigen::Index n = trans.rows();
    Eigen::MatrixXd lhs = (trans - Eigen::MatrixXd::Identity(n, n)).transpose();
    lhs.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[n - 1] = 1.0;
    return lhs.fullPivLu().solve(rhs);
}

double stationary_dropout_probability(const SchmmModel& model) {
    return stationary_distribution(model.trans).dot(model.mix.col(model.dirac()));
}

SchmmModel reference_model() {
    SchmmModel m;
    m.n_states = 3;
    m.n_mixtures = 4;
    m.mask = kDefaultMask;
    m.pi.resize(3);
    m.pi << 0.4215, 0.4572, 0.1213;
    m.trans.resize(3, 3);
    // clang-format off
    m.trans << 0.6832, 0.2079, 0.1089,
               0.2894, 0.5538, 0.1568,
               0.1245, 0.3761, 0.4994;
    m.mix.resize(3, 4);
    m.mix << 0.0221, 0.4528, 0.3647, 0.1604,
             0.0213, 0.5327, 0.2934, 0.1526,
             0.0198, 0.5021, 0.3504, 0.1277;
    // clang-format on
    m.mu.resize(4);
    m.mu << 46.00, 49.85, 58.17, kDefaultMask;
    m.sigma.resize(4);
    m.sigma << 0.4149, 1.0733, 2.9872, kDiracSigma;
    normalize(m.pi);
    normalize_rows(m.trans);
    normalize_rows(m.mix);
    return m;
}

void DelayTrace::validate() const {
    for (std::size_t t = 0; t < samples.size(); ++t) {
        const double s = samples[t];
        if (s == mask) continue;
        if (!(s > 0.0 && s < mask)) {
            std::ostringstream os;
            os << "sample " << t << " = " << s << " is neither a delay in (0, mask) nor the mask";
            throw InvariantError(os.str());
        }
    }
}

}  // namespace hmmpc::schmm
