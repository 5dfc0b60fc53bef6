#pragma once

#include "hmmpc/schmm/model.hpp"

#include <filesystem>
#include <string>

namespace hmmpc::netsim {

// Trace files hold one delay in milliseconds per line. Dropouts are written
// as the mask value (100000 by default). Lines starting with '#' and blank
// lines are skipped. Values are written in the shortest decimal form that
// reads back to the same double.

schmm::DelayTrace parse_trace(const std::string& text, double mask = schmm::kDefaultMask);
std::string format_trace(const schmm::DelayTrace& trace);

schmm::DelayTrace load_trace(const std::filesystem::path& path, double mask = schmm::kDefaultMask);
void save_trace(const schmm::DelayTrace& trace, const std::filesystem::path& path);

/// Shortest fixed-notation text that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace hmmpc::netsim
