#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hmmpc::schmm {

/// Delay value that marks a dropped packet, in milliseconds.
inline constexpr double kDefaultMask = 1e5;
/// Standard deviation attached to the dropout component. It never enters a
/// density evaluation; it is stored so that model files stay self-describing.
inline constexpr double kDiracSigma = 1e-4;
/// Width of one observation bin, used to turn Gaussian densities into masses.
inline constexpr double kDefaultSamplePeriodMs = 10.0;
/// Tolerance on stochastic rows and vectors.
inline constexpr double kStochasticTol = 1e-9;

/**
 * @brief Semi-continuous HMM over packet delays.
 *
 * A shared codebook of `n_mixtures` one-dimensional distributions is mixed
 * per hidden state. Components 0..M-2 are Gaussians in milliseconds, the last
 * one is a point mass at the dropout mask.
 */
struct SchmmModel {
    int n_states = 0;
    int n_mixtures = 0;
    Eigen::VectorXd pi;     ///< initial state distribution (N)
    Eigen::MatrixXd trans;  ///< row-stochastic transitions (N x N)
    Eigen::MatrixXd mix;    ///< row-stochastic component weights (N x M)
    Eigen::VectorXd mu;     ///< component means in ms (M); mu[M-1] == mask
    Eigen::VectorXd sigma;  ///< component standard deviations in ms (M)
    double mask = kDefaultMask;

    int dirac() const { return n_mixtures - 1; }
    int n_gaussians() const { return n_mixtures - 1; }

    /// Throws InvariantError describing the first violated invariant.
    void validate() const;

    bool operator==(const SchmmModel& other) const;
};

/// Divides every row of `m` (or the vector `v`) by its sum.
void normalize_rows(Eigen::MatrixXd& m);
void normalize(Eigen::VectorXd& v);

/// Stationary distribution of a row-stochastic matrix (left Perron vector).
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& trans);

/// Probability that a packet is dropped when the chain is in steady state.
double stationary_dropout_probability(const SchmmModel& model);

/// The model printed in the reference experiment: three states, three
/// Gaussians around 46, 50 and 58 ms plus the dropout component. The printed
/// values are rounded to four digits, so rows are renormalized here.
SchmmModel reference_model();

/**
 * @brief Ordered packet delays in milliseconds.
 *
 * Each sample is either strictly between 0 and the mask or exactly equal to
 * the mask (a dropout).
 */
struct DelayTrace {
    std::vector<double> samples;
    double mask = kDefaultMask;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    bool is_dropout(std::size_t t) const { return samples[t] == mask; }

    void validate() const;
};

/// Causal forward filter carried between online predictions.
struct FilterState {
    Eigen::VectorXd alpha;  ///< normalized filtered state distribution
    int last_state = -1;
    long t = 0;             ///< number of observations folded in so far
};

}  // namespace hmmpc::schmm
