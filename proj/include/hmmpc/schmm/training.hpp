#pragma once

#include "hmmpc/schmm/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hmmpc::schmm {

/// One-dimensional clustering result, centers sorted ascending.
struct Clusters {
    std::vector<double> centers;
    std::vector<double> spreads;  ///< within-cluster standard deviation
    std::vector<std::size_t> counts;
};

/// Lloyd's algorithm from k-means++ seeds drawn with `seed`.
/// Throws DomainError when there are fewer than k distinct values.
Clusters kmeans_1d(const std::vector<double>& values, int k, std::uint64_t seed, int max_iters = 300);

/**
 * @brief Local maxima of a kernel density estimate, most prominent first.
 *
 * The bandwidth is half of Silverman's rule, narrow enough to keep a sharp
 * low-weight delay mode separate from a broad neighbour. At most `k` modes
 * are returned (sorted ascending); fewer when the density has fewer peaks.
 */
Clusters density_modes(const std::vector<double>& values, int k);

/// Model with uniform pi, trans and mix, Gaussians at the given clusters and
/// the dropout component pinned at `mask`.
SchmmModel model_from_clusters(int n_states, int n_mixtures, const Clusters& clusters, double mask);

/// Uniform model seeded by k-means over the non-dropout samples of `trace`.
SchmmModel init_model(int n_states, int n_mixtures, const DelayTrace& trace, double mask, std::uint64_t seed);

struct EmOptions {
    int max_iters = 50;
    double tol = 1e-8;
    double weight_floor = 1e-6;
    double variance_floor = 1e-8;
    double bin_ms = kDefaultSamplePeriodMs;
};

struct EmResult {
    SchmmModel model;
    std::vector<double> log_likelihood;  ///< one entry per evaluated model
    int iterations = 0;                  ///< M-steps performed
    bool converged = false;
    std::vector<std::string> warnings;
};

/**
 * @brief Baum-Welch re-estimation for the semi-continuous model.
 *
 * Stops when the log-likelihood gain drops below `tol` or after
 * `max_iters` M-steps. Mixture weights are kept at or above
 * `weight_floor` (floored entries sit exactly on the floor, the rest share
 * the remaining mass), variances at or above `variance_floor`. The dropout
 * component's mean and spread are never touched; its weight column is.
 */
EmResult em_fit(const SchmmModel& model0, const DelayTrace& trace, const EmOptions& options = {});

struct TrainOptions {
    int n_states = 3;
    int n_mixtures = 4;
    std::uint64_t seed = 1;
    bool density_seed = true;  ///< add a start at the density modes
    EmOptions em;
};

struct TrainResult {
    EmResult best;
    std::string best_start;               ///< "kmeans" or "density", optionally "-tilted"
    std::vector<std::string> starts;
    std::vector<double> final_log_likelihood;
};

/// EM from the k-means start and, when enabled and available, from the
/// density-mode start; keeps the fit with the highest final log-likelihood.
/// Copy of `model` with diagonal-heavy transitions and state i leaning on
/// Gaussian i mod (M-1). Means and deviations are kept.
SchmmModel tilt_states(const SchmmModel& model);

TrainResult train_model(const DelayTrace& trace, const TrainOptions& options);

/// Non-dropout samples of a trace.
std::vector<double> delays_only(const DelayTrace& trace);

}  // namespace hmmpc::schmm
