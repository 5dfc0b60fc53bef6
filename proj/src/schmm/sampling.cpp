#include "hmmpc/schmm/sampling.hpp"

namespace hmmpc::schmm {

DelaySampler::DelaySampler(SchmmModel model, std::uint64_t seed) : model_(std::move(model)), rng_(seed) {
    model_.validate();
}

int DelaySampler::draw_categorical(const Eigen::Ref<const Eigen::VectorXd>& p) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = u(rng_) * p.sum();
    double acc = 0.0;
    int last_positive = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last_positive = static_cast<int>(i);
        if (r < acc) return last_positive;
    }
    return last_positive;
}

double DelaySampler::next() {
    state_ = state_ < 0 ? draw_categorical(model_.pi) : draw_categorical(model_.trans.row(state_).transpose());
    const int g = draw_categorical(model_.mix.row(state_).transpose());
    if (g == model_.dirac()) return model_.mask;

    std::normal_distribution<double> gauss(model_.mu[g], model_.sigma[g]);
    for (;;) {
        const double tau = gauss(rng_);
        if (tau > 0.0 && tau < model_.mask) return tau;
    }
}

DelayTrace sample_trace(const SchmmModel& model, std::size_t length, std::uint64_t seed) {
    DelaySampler sampler(model, seed);
    DelayTrace trace;
    trace.mask = model.mask;
    trace.samples.reserve(length);
    for (std::size_t t = 0; t < length; ++t) trace.samples.push_back(sampler.next());
    return trace;
}

}  // namespace hmmpc::schmm
