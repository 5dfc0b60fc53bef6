#pragma once

#include "hmmpc/schmm/model.hpp"

#include <filesystem>
#include <string>

namespace hmmpc::schmm {

// Model files are JSON objects with the keys n_states, n_mixtures, pi,
// trans (row-major), mix (row-major), mu, sigma and mask. Numbers are
// written in shortest round-trip form, so save followed by load reproduces
// the model bit for bit.

std::string model_to_string(const SchmmModel& model);
SchmmModel model_from_string(const std::string& text);

void save_model(const SchmmModel& model, const std::filesystem::path& path);
SchmmModel load_model(const std::filesystem::path& path);

}  // namespace hmmpc::schmm
