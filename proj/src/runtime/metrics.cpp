#include "hmmpc/runtime/metrics.hpp"

#include "hmmpc/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hmmpc::runtime {

double position_diameter(const std::vector<Eigen::VectorXd>& states, const std::vector<int>& coordinates) {
    double d = 0.0;
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = a + 1; b < states.size(); ++b)
            d = std::max(d, topology::restricted_norm(states[a] - states[b], coordinates));
    return d;
}

ConsensusReport consensus_report(const SimResult& r, double fraction) {
    if (r.error_norm.empty()) throw DomainError("empty simulation result");
    ConsensusReport rep;
    rep.fraction = fraction;
    rep.initial_error = r.error_norm.front();

    const double diameter = position_diameter(r.states.front(), r.translational);
    rep.delta_ref = r.delta_max.front();
    if (rep.delta_ref < 1e-9 * diameter) rep.delta_ref = diameter;

    auto below = [&](std::size_t k) {
        for (std::size_t i = 0; i < r.error_norm[k].size(); ++i) {
            if (!(r.error_norm[k][i] < fraction * rep.initial_error[i]) && rep.initial_error[i] > 0.0) return false;
        }
        return r.delta_max[k] < fraction * rep.delta_ref || rep.delta_ref == 0.0;
    };
    // Walk back from the end to the first step of the trailing run under threshold.
    std::optional<long> settle;
    for (std::size_t k = r.error_norm.size(); k-- > 0;) {
        if (!below(k)) break;
        settle = static_cast<long>(k);
    }
    rep.settling_step = settle;

    const auto& last = r.error_norm.back();
    for (std::size_t i = 0; i < last.size(); ++i) {
        if (rep.initial_error[i] > 0.0) rep.final_max_ratio = std::max(rep.final_max_ratio, last[i] / rep.initial_error[i]);
    }
    rep.final_delta_ratio = rep.delta_ref > 0.0 ? r.delta_max.back() / rep.delta_ref : 0.0;
    return rep;
}

double parameter_drift(const schmm::SchmmModel& a, const schmm::SchmmModel& b) {
    if (a.n_states != b.n_states || a.n_mixtures != b.n_mixtures) throw DomainError("model shapes differ");
    double d = (a.pi - b.pi).cwiseAbs().maxCoeff();
    d = std::max(d, (a.trans - b.trans).cwiseAbs().maxCoeff());
    return std::max(d, (a.mix - b.mix).cwiseAbs().maxCoeff());
}

double max_parameter_drift(const SimResult& r) {
    std::map<std::pair<int, int>, std::pair<const ModelSnapshot*, const ModelSnapshot*>> span;
    for (const auto& s : r.snapshots) {
        auto [it, fresh] = span.try_emplace({s.agent, s.neighbor}, &s, &s);
        if (fresh) continue;
        if (s.step < it->second.first->step) it->second.first = &s;
        if (s.step >= it->second.second->step) it->second.second = &s;
    }
    double d = 0.0;
    for (const auto& [link, ends] : span) d = std::max(d, parameter_drift(ends.first->model, ends.second->model));
    return d;
}

double mean_prediction_error(const SimResult& r) {
    double sum = 0.0;
    long count = 0;
    for (const auto& d : r.delays) {
        if (d.dropped || !d.predicted_ms) continue;
        if (*d.predicted_ms >= schmm::kDefaultMask) continue;
        sum += std::abs(*d.predicted_ms - d.realized_ms);
        ++count;
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace hmmpc::runtime
