#pragma once

#include "hmmpc/schmm/model.hpp"

#include <string>

namespace hmmpc::schmm {

struct IncrementalUpdate {
    SchmmModel model;
    bool accepted = true;
    std::string warning;  ///< set when the observation was rejected
};

/**
 * @brief One online EM step on a single delay observation.
 *
 * E-step: gamma(i) proportional to pi_i b_i(tau) and gamma(i,j)
 * proportional to pi_i a_ij b_j(tau), each normalized over its full index
 * set. M-step: convex blends with rate eta for pi and trans (rows then
 * renormalized), and for every Gaussian g a blend toward tau with rate
 * eta * r_g, where r_g is the posterior share of component g. Mixture
 * weights are left as trained offline.
 *
 * eta == 0 returns the input untouched. An observation with zero mass under
 * every state is rejected.
 */
IncrementalUpdate incremental_em_update(const SchmmModel& model, double tau_prev, double eta,
                                        double bin_ms = kDefaultSamplePeriodMs, double variance_floor = 1e-8);

}  // namespace hmmpc::schmm
