#include "hmmpc/netsim/delay_source.hpp"

#include "hmmpc/error.hpp"

namespace hmmpc::netsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class ConstantProcess final : public LinkDelayProcess {
public:
    explicit ConstantProcess(double d) : delay_(d) {}
    double next() override { return delay_; }

private:
    double delay_;
};

class ReplayProcess final : public LinkDelayProcess {
public:
    ReplayProcess(std::shared_ptr<const schmm::DelayTrace> trace, std::size_t offset)
        : trace_(std::move(trace)), pos_(offset % trace_->size()) {}
    double next() override {
        const double d = trace_->samples[pos_];
        pos_ = (pos_ + 1) % trace_->size();
        return d;
    }

private:
    std::shared_ptr<const schmm::DelayTrace> trace_;
    std::size_t pos_;
};

class SamplerProcess final : public LinkDelayProcess {
public:
    SamplerProcess(schmm::SchmmModel model, std::uint64_t seed) : sampler_(std::move(model), seed) {}
    double next() override { return sampler_.next(); }

private:
    schmm::DelaySampler sampler_;
};

}  // namespace

std::uint64_t link_seed(std::uint64_t master, int sender, int receiver) {
    const std::uint64_t link = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(sender)) << 32) |
                               static_cast<std::uint32_t>(receiver);
    return splitmix64(master ^ splitmix64(link));
}

DelaySource constant_delay(double delay_ms) {
    if (!(delay_ms >= 0.0)) throw DomainError("constant delay must be non-negative");
    return [delay_ms](int, int) { return std::make_unique<ConstantProcess>(delay_ms); };
}

DelaySource trace_replay(schmm::DelayTrace trace, std::uint64_t master_seed) {
    if (trace.empty()) throw DomainError("cannot replay an empty trace");
    auto shared = std::make_shared<const schmm::DelayTrace>(std::move(trace));
    return [shared, master_seed](int s, int r) {
        return std::make_unique<ReplayProcess>(shared, static_cast<std::size_t>(link_seed(master_seed, s, r)));
    };
}

DelaySource model_sampler(schmm::SchmmModel model, std::uint64_t master_seed) {
    model.validate();
    return [model, master_seed](int s, int r) {
        return std::make_unique<SamplerProcess>(model, link_seed(master_seed, s, r));
    };
}

}  // namespace hmmpc::netsim
