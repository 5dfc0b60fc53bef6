#pragma once

#include "hmmpc/schmm/model.hpp"
#include "hmmpc/schmm/sampling.hpp"

#include <cstdint>
#include <functional>
#include <memory>

namespace hmmpc::netsim {

/// Independent delay process attached to one directed link.
class LinkDelayProcess {
public:
    virtual ~LinkDelayProcess() = default;
    /// Delay in ms of the next packet on this link; the mask means dropped.
    virtual double next() = 0;
};

/// Builds the process of link sender -> receiver.
using DelaySource = std::function<std::unique_ptr<LinkDelayProcess>(int sender, int receiver)>;

/// Seed of link (sender, receiver): splitmix64 of the master seed mixed
/// with splitmix64 of (sender << 32 | receiver).
std::uint64_t link_seed(std::uint64_t master, int sender, int receiver);

/// Every packet takes `delay_ms`.
DelaySource constant_delay(double delay_ms);

/// Each link replays `trace` cyclically, starting at an offset drawn from the link seed.
DelaySource trace_replay(schmm::DelayTrace trace, std::uint64_t master_seed);

/// Each link samples its own copy of `model` with the link seed.
DelaySource model_sampler(schmm::SchmmModel model, std::uint64_t master_seed);

}  // namespace hmmpc::netsim
