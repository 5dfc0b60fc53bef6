#include "hmmpc/schmm/inference.hpp"

#include "hmmpc/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hmmpc::schmm {

namespace {

double gaussian_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

Eigen::VectorXd component_masses(const SchmmModel& model, double tau, double bin_ms) {
    if (!(tau > 0.0)) {
        std::ostringstream os;
        os << "delay must be positive, got " << tau;
        throw DomainError(os.str());
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(model.n_mixtures);
    if (tau == model.mask) {
        f[model.dirac()] = 1.0;
        return f;
    }
    for (int g = 0; g < model.n_gaussians(); ++g) {
        f[g] = gaussian_pdf(tau, model.mu[g], model.sigma[g]) * bin_ms;
    }
    return f;
}

Emission emission_weight(const SchmmModel& model, int state, double tau, double bin_ms) {
    if (state < 0 || state >= model.n_states) throw DomainError("state index out of range");
    const Eigen::VectorXd f = component_masses(model, tau, bin_ms);
    Emission e;
    e.weighted = model.mix.row(state).transpose().cwiseProduct(f);
    e.total = e.weighted.sum();
    return e;
}

Eigen::VectorXd emission_vector(const SchmmModel& model, double tau, double bin_ms) {
    return model.mix * component_masses(model, tau, bin_ms);
}

Eigen::MatrixXd ForwardBackward::posteriors() const { return alpha.cwiseProduct(beta); }

ForwardBackward forward_backward(const SchmmModel& model, const DelayTrace& trace, double bin_ms) {
    if (trace.empty()) throw DomainError("forward_backward needs a non-empty trace");
    const Eigen::Index T = static_cast<Eigen::Index>(trace.size());
    const int N = model.n_states;

    ForwardBackward fb;
    fb.alpha.resize(T, N);
    fb.beta.resize(T, N);
    fb.emission.resize(T, N);
    fb.scale.resize(T);

    for (Eigen::Index t = 0; t < T; ++t) {
        fb.emission.row(t) = emission_vector(model, trace.samples[t], bin_ms).transpose();
    }

    Eigen::RowVectorXd a = model.pi.transpose().cwiseProduct(fb.emission.row(0));
    for (Eigen::Index t = 0;; ++t) {
        const double c = a.sum();
        if (!(c > 0.0)) {
            std::ostringstream os;
            os << "forward probabilities vanish at t = " << t << " (tau = " << trace.samples[t] << ")";
            throw UnderflowError(static_cast<std::size_t>(t), os.str());
        }
        fb.scale[t] = c;
        fb.alpha.row(t) = a / c;
        if (t + 1 == T) break;
        a = (fb.alpha.row(t) * model.trans).cwiseProduct(fb.emission.row(t + 1));
    }

    fb.beta.row(T - 1).setOnes();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const Eigen::VectorXd next = fb.emission.row(t + 1).transpose().cwiseProduct(fb.beta.row(t + 1).transpose());
        fb.beta.row(t) = (model.trans * next).transpose() / fb.scale[t + 1];
    }

    fb.log_likelihood = fb.scale.array().log().sum();
    return fb;
}

double log_likelihood(const SchmmModel& model, const DelayTrace& trace, double bin_ms) {
    if (trace.empty()) throw DomainError("log_likelihood needs a non-empty trace");
    double ll = 0.0;
    Eigen::RowVectorXd a = model.pi.transpose().cwiseProduct(emission_vector(model, trace.samples[0], bin_ms).transpose());
    for (std::size_t t = 0;; ++t) {
        const double c = a.sum();
        if (!(c > 0.0)) throw UnderflowError(t, "forward probabilities vanish at t = " + std::to_string(t));
        ll += std::log(c);
        a /= c;
        if (t + 1 == trace.size()) break;
        a = (a * model.trans).cwiseProduct(emission_vector(model, trace.samples[t + 1], bin_ms).transpose());
    }
    return ll;
}

FilterState initial_filter(const SchmmModel& model) {
    FilterState f;
    f.alpha = model.pi;
    f.last_state = argmax(f.alpha);
    f.t = 0;
    return f;
}

FilterState filter_update(const SchmmModel& model, const FilterState& filter, double tau, double bin_ms) {
    const Eigen::VectorXd prior = filter.t == 0 ? model.pi : Eigen::VectorXd(model.trans.transpose() * filter.alpha);
    Eigen::VectorXd post = prior.cwiseProduct(emission_vector(model, tau, bin_ms));
    const double z = post.sum();

    FilterState next;
    next.alpha = z > 0.0 ? Eigen::VectorXd(post / z) : Eigen::VectorXd(prior / prior.sum());
    next.last_state = argmax(next.alpha);
    next.t = filter.t + 1;
    return next;
}

DelayPrediction predict_from_state(const SchmmModel& model, int current_state) {
    DelayPrediction p;
    p.prev_state = current_state;
    p.next_state = argmax(model.trans.row(current_state).transpose());
    p.component = argmax(model.mix.row(p.next_state).transpose());
    p.dropout = p.component == model.dirac();
    p.delay_ms = model.mu[p.component];
    return p;
}

ViterbiStep viterbi_predict(const SchmmModel& model, const FilterState& filter, double tau_prev, double bin_ms) {
    ViterbiStep step;
    step.filter = filter_update(model, filter, tau_prev, bin_ms);
    step.prediction = predict_from_state(model, step.filter.last_state);
    return step;
}

std::vector<double> lag_residuals(const Eigen::VectorXd& received, const std::vector<LaggedState>& history,
                                  int tau_max) {
    std::vector<double> r;
    r.reserve(history.size());
    for (const auto& h : history) {
        if (h.lag > tau_max) continue;
        r.push_back((received - h.state).norm());
    }
    return r;
}

int estimate_prev_delay(const Eigen::VectorXd& received, const std::vector<LaggedState>& history, int tau_max) {
    int best_lag = -1;
    double best = 0.0;
    for (const auto& h : history) {
        if (h.lag < 0 || h.lag > tau_max) continue;
        const double r = (received - h.state).norm();
        if (best_lag < 0 || r < best || (r == best && h.lag < best_lag)) {
            best = r;
            best_lag = h.lag;
        }
    }
    if (best_lag < 0) throw DomainError("estimate_prev_delay needs a non-empty prediction history");
    return best_lag;
}

}  // namespace hmmpc::schmm
