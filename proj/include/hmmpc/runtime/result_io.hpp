#pragma once

#include "hmmpc/runtime/simulation.hpp"

#include <filesystem>

namespace hmmpc::runtime {

// A run directory holds:
//   states.csv     step,agent,x0..x{n-1}
//   inputs.csv     step,agent,u0..u{m-1}
//   errors.csv     step,agent,error_norm,V,alpha,J,horizon
//   delta_max.csv  step,delta_max
//   delays.csv     step,link,predicted,realized,dropped   (predicted empty if never processed)
//   channel.csv    step,link,sent,delivered,dropped       (cumulative)
//   gains.txt      certificate of every agent's gain
//   run.txt        agent count, steps, sample period, positional coordinates
//   warnings.txt   one warning per line
//   models/agentI_neighborJ_stepK.model
// Numbers use the shortest round-trip text, so equal results give equal bytes.

/// Writes every file above, creating `dir` if needed.
void write_result(const SimResult& result, const std::filesystem::path& dir);

/// Reads back the series needed for reporting: states, error norms, V, alpha,
/// J, horizons, delta_max, delay records and run.txt metadata. Gains and snapshots are left
/// empty. Throws Error when the directory holds no run.
SimResult read_result(const std::filesystem::path& dir);

}  // namespace hmmpc::runtime
