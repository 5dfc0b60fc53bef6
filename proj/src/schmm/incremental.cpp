#include "hmmpc/schmm/incremental.hpp"

#include "hmmpc/error.hpp"
#include "hmmpc/schmm/inference.hpp"

#include <cmath>
#include <sstream>

namespace hmmpc::schmm {

IncrementalUpdate incremental_em_update(const SchmmModel& model, double tau_prev, double eta, double bin_ms,
                                        double variance_floor) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("learning rate must lie in [0, 1]");
    IncrementalUpdate out{model, true, {}};
    if (eta == 0.0) return out;

    const Eigen::VectorXd f = component_masses(model, tau_prev, bin_ms);
    const Eigen::VectorXd b = model.mix * f;

    const Eigen::VectorXd joint_state = model.pi.cwiseProduct(b);
    const double z_state = joint_state.sum();
    if (!(z_state > 0.0)) {
        std::ostringstream os;
        os << "delay " << tau_prev << " ms has zero probability under every state; observation ignored";
        out.accepted = false;
        out.warning = os.str();
        return out;
    }
    const Eigen::VectorXd gamma = joint_state / z_state;

    Eigen::MatrixXd pair = model.trans;
    for (int i = 0; i < model.n_states; ++i) {
        pair.row(i) *= model.pi[i];
        pair.row(i) = pair.row(i).cwiseProduct(b.transpose());
    }
    const double z_pair = pair.sum();

    SchmmModel& m = out.model;
    m.pi = (1.0 - eta) * model.pi + eta * gamma;
    normalize(m.pi);
    if (z_pair > 0.0) {
        m.trans = (1.0 - eta) * model.trans + eta * (pair / z_pair);
        normalize_rows(m.trans);
    }

    // Posterior share of each Gaussian, summed over states.
    for (int g = 0; g < model.n_gaussians(); ++g) {
        double r = 0.0;
        for (int i = 0; i < model.n_states; ++i) {
            if (b[i] > 0.0) r += gamma[i] * model.mix(i, g) * f[g] / b[i];
        }
        if (r == 0.0) continue;
        const double step = eta * r;
        const double mean = (1.0 - step) * model.mu[g] + step * tau_prev;
        const double dev = tau_prev - mean;
        const double var = (1.0 - step) * model.sigma[g] * model.sigma[g] + step * dev * dev;
        m.mu[g] = mean;
        m.sigma[g] = std::sqrt(std::max(var, variance_floor));
    }
    return out;
}

}  // namespace hmmpc::schmm
