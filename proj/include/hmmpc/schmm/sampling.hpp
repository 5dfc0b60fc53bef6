#pragma once

#include "hmmpc/schmm/model.hpp"

#include <cstdint>
#include <random>

namespace hmmpc::schmm {

/**
 * @brief Draws delays from a model one packet at a time.
 *
 * The hidden state starts from pi and moves along trans after every draw.
 * Gaussian draws are truncated to the open interval (0, mask) by
 * resampling.
 */
class DelaySampler {
public:
    DelaySampler(SchmmModel model, std::uint64_t seed);

    double next();
    int state() const { return state_; }
    const SchmmModel& model() const { return model_; }

private:
    int draw_categorical(const Eigen::Ref<const Eigen::VectorXd>& p);

    SchmmModel model_;
    std::mt19937_64 rng_;
    int state_ = -1;
};

/// `length` consecutive draws of a DelaySampler seeded with `seed`.
DelayTrace sample_trace(const SchmmModel& model, std::size_t length, std::uint64_t seed);

}  // namespace hmmpc::schmm
