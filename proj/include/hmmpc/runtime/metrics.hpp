#pragma once

#include "hmmpc/runtime/simulation.hpp"
#include "hmmpc/schmm/model.hpp"

#include <optional>
#include <vector>

namespace hmmpc::runtime {

struct ConsensusReport {
    std::vector<double> initial_error;  ///< ||e_i(0)|| per agent
    double delta_ref = 0.0;             ///< reference for the delta_max threshold
    double fraction = 0.01;
    /// First step from which every agent and delta_max stay under threshold
    /// until the end of the run. Empty if the run ends above threshold.
    std::optional<long> settling_step;
    double final_max_ratio = 0.0;  ///< max_i ||e_i(T-1)|| / ||e_i(0)||
    double final_delta_ratio = 0.0;

    bool reached() const { return settling_step.has_value(); }
};

/// Largest pairwise distance between agents over the given coordinates.
double position_diameter(const std::vector<Eigen::VectorXd>& states, const std::vector<int>& coordinates);

/**
 * @brief Settling analysis of the consensus errors.
 *
 * Thresholds are `fraction` of each agent's initial error and of the initial
 * delta_max. On a complete graph every agent sees the same local consensus
 * point at step 0, so delta_max starts at zero; the initial position diameter
 * replaces it as reference whenever delta_max(0) is below 1e-9 of it.
 */
ConsensusReport consensus_report(const SimResult& result, double fraction = 0.01);

/// Max absolute change over the pi, trans and mix entries.
double parameter_drift(const schmm::SchmmModel& before, const schmm::SchmmModel& after);

/// Largest parameter_drift between the first and last snapshot of each
/// (agent, neighbor) pair.
double max_parameter_drift(const SimResult& result);

/// Mean |predicted - realized| over delivered packets that were processed
/// and not predicted as dropouts.
double mean_prediction_error(const SimResult& result);

}  // namespace hmmpc::runtime
