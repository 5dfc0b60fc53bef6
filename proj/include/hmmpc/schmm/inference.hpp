#pragma once

#include "hmmpc/schmm/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hmmpc::schmm {

/// Per-component weighted masses of one state and their sum b_i(tau).
struct Emission {
    Eigen::VectorXd weighted;  ///< mix[state][g] * f_g(tau)
    double total = 0.0;
};

/**
 * @brief Unweighted component masses f_g(tau) for a single observation.
 *
 * Gaussians contribute pdf(tau) * bin_ms, the dropout component contributes
 * 1 on an exact match with the mask and 0 otherwise. Gaussians contribute
 * nothing to a dropout observation.
 */
Eigen::VectorXd component_masses(const SchmmModel& model, double tau, double bin_ms = kDefaultSamplePeriodMs);

/// Emission of `state` for delay `tau` (ms). Throws DomainError if tau <= 0.
Emission emission_weight(const SchmmModel& model, int state, double tau, double bin_ms = kDefaultSamplePeriodMs);

/// b_i(tau) for every state.
Eigen::VectorXd emission_vector(const SchmmModel& model, double tau, double bin_ms = kDefaultSamplePeriodMs);

/**
 * @brief Scaled forward-backward pass.
 *
 * alpha.row(t) is the filtered distribution P(s_t | tau_0..t); beta is
 * scaled by the same factors so that alpha(t,i) * beta(t,i) is the smoothed
 * posterior. log_likelihood = sum_t log(scale[t]).
 */
struct ForwardBackward {
    Eigen::MatrixXd alpha;      ///< T x N
    Eigen::MatrixXd beta;       ///< T x N
    Eigen::MatrixXd emission;   ///< T x N, b_i(tau_t)
    Eigen::VectorXd scale;      ///< T
    double log_likelihood = 0.0;

    /// Smoothed state posteriors, T x N; every row sums to one.
    Eigen::MatrixXd posteriors() const;
};

/// Throws UnderflowError naming the first step whose forward row vanishes.
ForwardBackward forward_backward(const SchmmModel& model, const DelayTrace& trace,
                                 double bin_ms = kDefaultSamplePeriodMs);

/// Log-likelihood only (forward pass).
double log_likelihood(const SchmmModel& model, const DelayTrace& trace, double bin_ms = kDefaultSamplePeriodMs);

/// Outcome of the one-step-ahead delay prediction.
struct DelayPrediction {
    bool dropout = false;
    double delay_ms = 0.0;  ///< mu[g*]; equals the mask when `dropout`
    int prev_state = 0;     ///< s_{k-1}
    int next_state = 0;     ///< s_k
    int component = 0;      ///< g*
};

/// Filter before any observation: alpha = pi.
FilterState initial_filter(const SchmmModel& model);

/**
 * @brief Folds one observation into the causal filter.
 *
 * The first observation is weighted against pi, later ones against the
 * one-step prediction trans^T alpha. An observation with zero mass under
 * every state leaves the prediction unweighted.
 */
FilterState filter_update(const SchmmModel& model, const FilterState& filter, double tau,
                          double bin_ms = kDefaultSamplePeriodMs);

/// Prediction from a known current state: most likely successor, then the
/// heaviest component of its mixture row (dropout included). Lowest index wins ties.
DelayPrediction predict_from_state(const SchmmModel& model, int current_state);

/// Filter update with tau_prev followed by predict_from_state(argmax alpha).
struct ViterbiStep {
    DelayPrediction prediction;
    FilterState filter;
};
ViterbiStep viterbi_predict(const SchmmModel& model, const FilterState& filter, double tau_prev,
                            double bin_ms = kDefaultSamplePeriodMs);

/// A predicted neighbor state `lag` samples in the past.
struct LaggedState {
    int lag = 0;
    Eigen::VectorXd state;
};

/// ||received - predicted(lag)|| for every history entry with lag <= tau_max, in history order.
std::vector<double> lag_residuals(const Eigen::VectorXd& received, const std::vector<LaggedState>& history,
                                  int tau_max);

/// Lag minimizing the residual; ties go to the smallest lag. Throws DomainError on an empty history.
int estimate_prev_delay(const Eigen::VectorXd& received, const std::vector<LaggedState>& history, int tau_max);

/// Index of the largest entry, lowest index on ties.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace hmmpc::schmm
