#include "hmmpc/schmm/training.hpp"

#include "hmmpc/error.hpp"
#include "hmmpc/schmm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace hmmpc::schmm {

namespace {

std::size_t count_distinct(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

Clusters summarize(const std::vector<double>& values, std::vector<double> centers) {
    std::sort(centers.begin(), centers.end());
    const std::size_t k = centers.size();
    std::vector<double> sum(k, 0.0), sq(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (double x : values) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (std::abs(x - centers[j]) < std::abs(x - centers[best])) best = j;
        }
        sum[best] += x;
        sq[best] += x * x;
        ++count[best];
    }
    Clusters c;
    c.centers = centers;
    c.counts = count;
    for (std::size_t j = 0; j < k; ++j) {
        double sd = 0.0;
        if (count[j] > 0) {
            const double m = sum[j] / static_cast<double>(count[j]);
            sd = std::sqrt(std::max(0.0, sq[j] / static_cast<double>(count[j]) - m * m));
        }
        c.spreads.push_back(sd);
    }
    return c;
}

/// Projects expected counts onto {w >= floor, sum w = 1}: the maximizer of
/// sum n_g log w_g over that set.
Eigen::RowVectorXd floored_weights(const Eigen::RowVectorXd& counts, double floor) {
    const Eigen::Index m = counts.size();
    std::vector<bool> pinned(static_cast<std::size_t>(m), false);
    Eigen::RowVectorXd w(m);
    for (;;) {
        double free_count = 0.0;
        Eigen::Index n_pinned = 0;
        for (Eigen::Index g = 0; g < m; ++g) {
            if (pinned[g]) ++n_pinned;
            else free_count += counts[g];
        }
        const double free_mass = 1.0 - floor * static_cast<double>(n_pinned);
        bool changed = false;
        for (Eigen::Index g = 0; g < m; ++g) {
            if (pinned[g]) {
                w[g] = floor;
                continue;
            }
            w[g] = free_count > 0.0 ? free_mass * counts[g] / free_count : free_mass / static_cast<double>(m - n_pinned);
            if (w[g] < floor) {
                pinned[g] = true;
                changed = true;
            }
        }
        if (!changed) return w;
    }
}

}  // namespace

std::vector<double> delays_only(const DelayTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.size());
    for (double s : trace.samples) {
        if (s != trace.mask) out.push_back(s);
    }
    return out;
}

Clusters kmeans_1d(const std::vector<double>& values, int k, std::uint64_t seed, int max_iters) {
    if (k < 1) throw DomainError("k-means needs at least one cluster");
    if (count_distinct(values) < static_cast<std::size_t>(k)) {
        throw DomainError("only " + std::to_string(count_distinct(values)) + " distinct delays for " +
                          std::to_string(k) + " clusters; reduce the number of mixtures");
    }

    std::mt19937_64 rng(seed);
    std::vector<double> centers;
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    centers.push_back(values[pick(rng)]);

    std::vector<double> d2(values.size());
    while (static_cast<int>(centers.size()) < k) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
            d2[i] = best;
        }
        std::discrete_distribution<std::size_t> weighted(d2.begin(), d2.end());
        centers.push_back(values[weighted(rng)]);
    }

    std::vector<std::size_t> label(values.size(), 0);
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < centers.size(); ++j) {
                if (std::abs(values[i] - centers[j]) < std::abs(values[i] - centers[best])) best = j;
            }
            label[i] = best;
        }
        std::vector<double> sum(centers.size(), 0.0);
        std::vector<std::size_t> count(centers.size(), 0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            sum[label[i]] += values[i];
            ++count[label[i]];
        }
        bool moved = false;
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (count[j] == 0) continue;  // an empty cluster keeps its center
            const double c = sum[j] / static_cast<double>(count[j]);
            if (c != centers[j]) moved = true;
            centers[j] = c;
        }
        if (!moved) break;
    }
    return summarize(values, centers);
}

Clusters density_modes(const std::vector<double>& values, int k) {
    Clusters none;
    if (values.size() < 2 || k < 1) return none;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double var = 0.0;
    for (double x : sorted) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    auto quantile = [&](double q) {
        const double pos = q * (n - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    const double bw = 0.5 * 0.9 * spread * std::pow(n, -0.2);
    if (!(bw > 0.0)) return none;

    // Binned estimate: counts on a grid convolved with a truncated Gaussian kernel.
    const double lo = sorted.front() - 3.0 * bw;
    const double hi = sorted.back() + 3.0 * bw;
    const double step = std::max(bw / 4.0, (hi - lo) / 8192.0);
    const auto n_grid = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
    std::vector<double> counts(n_grid, 0.0);
    for (double x : sorted) {
        counts[static_cast<std::size_t>(std::lround((x - lo) / step))] += 1.0;
    }
    const auto half = static_cast<long>(std::ceil(4.0 * bw / step));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (long j = -half; j <= half; ++j) {
        const double z = static_cast<double>(j) * step / bw;
        kernel[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * z * z);
    }
    std::vector<double> density(n_grid, 0.0);
    for (std::size_t i = 0; i < n_grid; ++i) {
        if (counts[i] == 0.0) continue;
        for (long j = -half; j <= half; ++j) {
            const long t = static_cast<long>(i) + j;
            if (t < 0 || t >= static_cast<long>(n_grid)) continue;
            density[static_cast<std::size_t>(t)] += counts[i] * kernel[static_cast<std::size_t>(j + half)];
        }
    }

    // Topographic prominence of every local maximum.
    struct Peak {
        double x;
        double prominence;
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < n_grid; ++i) {
        if (!(density[i] > density[i - 1] && density[i] >= density[i + 1])) continue;
        double left_min = density[i];
        for (std::size_t l = i; l > 0 && density[l - 1] <= density[i]; --l) left_min = std::min(left_min, density[l - 1]);
        double right_min = density[i];
        for (std::size_t r = i; r + 1 < n_grid && density[r + 1] <= density[i]; ++r) {
            right_min = std::min(right_min, density[r + 1]);
        }
        peaks.push_back({lo + static_cast<double>(i) * step, density[i] - std::max(left_min, right_min)});
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    if (static_cast<int>(peaks.size()) > k) peaks.resize(static_cast<std::size_t>(k));

    std::vector<double> centers;
    for (const auto& p : peaks) centers.push_back(p.x);
    return summarize(values, centers);
}

SchmmModel model_from_clusters(int n_states, int n_mixtures, const Clusters& clusters, double mask) {
    if (n_states < 1) throw DomainError("n_states must be positive");
    if (n_mixtures < 2) throw DomainError("n_mixtures must be at least 2");
    const int k = n_mixtures - 1;
    if (static_cast<int>(clusters.centers.size()) != k) throw DomainError("cluster count does not match n_mixtures - 1");

    SchmmModel m;
    m.n_states = n_states;
    m.n_mixtures = n_mixtures;
    m.mask = mask;
    m.pi = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
    m.trans = Eigen::MatrixXd::Constant(n_states, n_states, 1.0 / n_states);
    m.mix = Eigen::MatrixXd::Constant(n_states, n_mixtures, 1.0 / n_mixtures);
    m.mu.resize(n_mixtures);
    m.sigma.resize(n_mixtures);
    for (int g = 0; g < k; ++g) {
        m.mu[g] = clusters.centers[static_cast<std::size_t>(g)];
        m.sigma[g] = std::max(clusters.spreads[static_cast<std::size_t>(g)], 1e-4);
    }
    m.mu[k] = mask;
    m.sigma[k] = kDiracSigma;
    return m;
}

SchmmModel init_model(int n_states, int n_mixtures, const DelayTrace& trace, double mask, std::uint64_t seed) {
    if (n_mixtures < 2) throw DomainError("n_mixtures must be at least 2 (one Gaussian plus the dropout component)");
    DelayTrace t = trace;
    t.mask = mask;
    const std::vector<double> delays = delays_only(t);
    if (static_cast<int>(delays.size()) < n_mixtures - 1) {
        throw DomainError("trace has " + std::to_string(delays.size()) + " delay samples, need at least " +
                          std::to_string(n_mixtures - 1));
    }
    return model_from_clusters(n_states, n_mixtures, kmeans_1d(delays, n_mixtures - 1, seed), mask);
}

EmResult em_fit(const SchmmModel& model0, const DelayTrace& trace, const EmOptions& opt) {
    model0.validate();
    if (trace.size() < 2) throw DomainError("em_fit needs at least two samples");
    if (trace.mask != model0.mask) throw DomainError("trace mask differs from the model mask");

    const int N = model0.n_states;
    const int M = model0.n_mixtures;
    const Eigen::Index T = static_cast<Eigen::Index>(trace.size());

    EmResult res;
    res.model = model0;
    std::set<int> starved;
    SchmmModel& m = res.model;

    for (int it = 0;; ++it) {
        const ForwardBackward fb = forward_backward(m, trace, opt.bin_ms);
        const double ll = fb.log_likelihood;
        res.log_likelihood.push_back(ll);
        if (it > 0 && ll - res.log_likelihood[res.log_likelihood.size() - 2] < opt.tol) {
            res.converged = true;
            break;
        }
        if (it == opt.max_iters) break;

        const Eigen::MatrixXd gamma = fb.posteriors();

        // Transition expectations.
        Eigen::MatrixXd xi_sum = Eigen::MatrixXd::Zero(N, N);
        for (Eigen::Index t = 0; t + 1 < T; ++t) {
            const Eigen::RowVectorXd nb = fb.emission.row(t + 1).cwiseProduct(fb.beta.row(t + 1)) / fb.scale[t + 1];
            xi_sum += (fb.alpha.row(t).transpose() * nb).cwiseProduct(m.trans);
        }

        // Component expectations: occupancy per (state, component) and the
        // first and second moments per Gaussian.
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(N, M);
        Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(T, M);
        for (Eigen::Index t = 0; t < T; ++t) {
            const double tau = trace.samples[static_cast<std::size_t>(t)];
            const Eigen::VectorXd f = component_masses(m, tau, opt.bin_ms);
            Eigen::VectorXd r_t = Eigen::VectorXd::Zero(M);
            for (int i = 0; i < N; ++i) {
                const double b = fb.emission(t, i);
                if (!(b > 0.0) || gamma(t, i) == 0.0) continue;
                const Eigen::RowVectorXd share = m.mix.row(i).cwiseProduct(f.transpose()) * (gamma(t, i) / b);
                comp.row(i) += share;
                r_t += share.transpose();
            }
            resp.row(t) = r_t.transpose();
        }
        const Eigen::VectorXd r_sum = resp.colwise().sum().transpose();

        SchmmModel next = m;
        next.pi = gamma.row(0).transpose();
        normalize(next.pi);
        for (int i = 0; i < N; ++i) {
            const double out = xi_sum.row(i).sum();
            if (out > 0.0) next.trans.row(i) = xi_sum.row(i) / out;
            const double occ = comp.row(i).sum();
            if (occ > 0.0) next.mix.row(i) = floored_weights(comp.row(i), opt.weight_floor);
        }

        for (int g = 0; g < m.n_gaussians(); ++g) {
            if (!(r_sum[g] > 1e-12)) {
                if (starved.insert(g).second) {
                    res.warnings.push_back("component " + std::to_string(g) +
                                           " received no responsibility; weight floored, mean and spread kept");
                }
                continue;
            }
            double sx = 0.0;
            for (Eigen::Index t = 0; t < T; ++t) {
                if (resp(t, g) > 0.0) sx += resp(t, g) * trace.samples[static_cast<std::size_t>(t)];
            }
            const double mean = sx / r_sum[g];
            double ss = 0.0;
            for (Eigen::Index t = 0; t < T; ++t) {
                const double d = trace.samples[static_cast<std::size_t>(t)] - mean;
                if (resp(t, g) > 0.0) ss += resp(t, g) * d * d;
            }
            next.mu[g] = mean;
            next.sigma[g] = std::sqrt(std::max(ss / r_sum[g], opt.variance_floor));
        }
        m = std::move(next);
        ++res.iterations;
    }
    return res;
}

SchmmModel tilt_states(const SchmmModel& model) {
    SchmmModel m = model;
    if (m.n_states < 2) return m;
    const int k = m.n_gaussians();
    m.trans = 0.5 * Eigen::MatrixXd::Identity(m.n_states, m.n_states) +
              Eigen::MatrixXd::Constant(m.n_states, m.n_states, 0.5 / m.n_states);
    m.mix.setOnes();
    for (int i = 0; i < m.n_states; ++i) m.mix(i, i % k) += 2.0;
    normalize_rows(m.trans);
    normalize_rows(m.mix);
    return m;
}

TrainResult train_model(const DelayTrace& trace, const TrainOptions& opt) {
    TrainResult out;
    std::vector<std::pair<std::string, SchmmModel>> starts;
    starts.emplace_back("kmeans", init_model(opt.n_states, opt.n_mixtures, trace, trace.mask, opt.seed));
    if (opt.density_seed) {
        const Clusters modes = density_modes(delays_only(trace), opt.n_mixtures - 1);
        if (static_cast<int>(modes.centers.size()) == opt.n_mixtures - 1) {
            starts.emplace_back("density", model_from_clusters(opt.n_states, opt.n_mixtures, modes, trace.mask));
        }
    }
    // EM cannot leave the symmetric point of a uniform start, so every start
    // also runs once with the states pulled apart.
    if (opt.n_states > 1) {
        const std::size_t uniform_starts = starts.size();
        for (std::size_t s = 0; s < uniform_starts; ++s) {
            starts.emplace_back(starts[s].first + "-tilted", tilt_states(starts[s].second));
        }
    }

    bool have = false;
    for (const auto& [name, model0] : starts) {
        EmResult fit = em_fit(model0, trace, opt.em);
        out.starts.push_back(name);
        out.final_log_likelihood.push_back(fit.log_likelihood.back());
        if (!have || fit.log_likelihood.back() > out.best.log_likelihood.back()) {
            out.best = std::move(fit);
            out.best_start = name;
            have = true;
        }
    }
    return out;
}

}  // namespace hmmpc::schmm
