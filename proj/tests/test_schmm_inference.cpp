#include "hmmpc/error.hpp"
#include "hmmpc/schmm/inference.hpp"
#include "hmmpc/schmm/sampling.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hmmpc;
using namespace hmmpc::schmm;

namespace {

SchmmModel single_gaussian(double mu, double sigma) {
    SchmmModel m;
    m.n_states = 1;
    m.n_mixtures = 2;
    m.pi = Eigen::VectorXd::Ones(1);
    m.trans = Eigen::MatrixXd::Ones(1, 1);
    m.mix = (Eigen::MatrixXd(1, 2) << 1.0, 0.0).finished();
    m.mu = Eigen::Vector2d(mu, kDefaultMask);
    m.sigma = Eigen::Vector2d(sigma, kDiracSigma);
    return m;
}

DelayTrace trace_of(std::vector<double> samples) {
    DelayTrace t;
    t.samples = std::move(samples);
    return t;
}

}  // namespace

TEST(Emission, DropoutUsesDiracWeight) {
    const auto m = reference_model();
    const auto e = emission_weight(m, 0, kDefaultMask);
    EXPECT_NEAR(e.total, 0.1604, 1e-4);
    EXPECT_EQ(e.weighted[0], 0.0);
    EXPECT_EQ(e.weighted[2], 0.0);
}

TEST(Emission, AllDiracGivesNoMassToDelays) {
    auto m = single_gaussian(50.0, 2.0);
    m.mix << 0.0, 1.0;
    EXPECT_EQ(emission_weight(m, 0, 47.0).total, 0.0);
}

TEST(Emission, GaussianMassPerBin) {
    const auto m = single_gaussian(50.0, 2.0);
    EXPECT_NEAR(emission_weight(m, 0, 50.0, 1.0).total, 0.19947114020071635, 1e-12);
    EXPECT_NEAR(emission_weight(m, 0, 50.0, 10.0).total, 1.9947114020071635, 1e-11);
}

TEST(Emission, RejectsNonPositiveDelay) {
    const auto m = single_gaussian(50.0, 2.0);
    EXPECT_THROW(emission_weight(m, 0, 0.0), DomainError);
    EXPECT_THROW(emission_weight(m, 0, -3.0), DomainError);
}

TEST(Emission, MatchesOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tau(20.0, 90.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = oracle::random_model(rng, 3, 4);
        const double x = tau(rng);
        const auto b = emission_vector(m, x);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(b[i], oracle::emission(m, i, x, 10.0), 1e-14);
    }
}

TEST(ForwardBackward, SingleStateIsSumOfLogEmissions) {
    const auto m = single_gaussian(50.0, 3.0);
    const auto t = trace_of({48.0, 51.0, 55.0, 50.0});
    double expected = 0.0;
    for (double x : t.samples) expected += std::log(oracle::emission(m, 0, x, 10.0));
    EXPECT_NEAR(forward_backward(m, t).log_likelihood, expected, 1e-12);
    EXPECT_NEAR(log_likelihood(m, t), expected, 1e-12);
}

TEST(ForwardBackward, AllDropoutsWithUniformDiracWeight) {
    std::mt19937_64 rng(9);
    auto m = oracle::random_model(rng, 3, 3);
    const double w = 0.25;
    for (int i = 0; i < 3; ++i) {
        m.mix(i, 2) = w;
        m.mix(i, 0) = 0.5;
        m.mix(i, 1) = 0.25;
    }
    const auto t = trace_of(std::vector<double>(6, kDefaultMask));
    EXPECT_NEAR(log_likelihood(m, t), 6.0 * std::log(w), 1e-12);
}

TEST(ForwardBackward, TwoStateThreeStepsMatchesEnumeration) {
    std::mt19937_64 rng(21);
    const auto m = oracle::random_model(rng, 2, 3);
    const std::vector<double> taus{42.0, kDefaultMask, 61.0};
    const double expected = std::log(oracle::brute_force_likelihood(m, taus, 10.0));
    EXPECT_NEAR(log_likelihood(m, trace_of(taus)), expected, 1e-10 * std::abs(expected));
}

TEST(ForwardBackward, MatchesEnumerationOnRandomCases) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        const int N = 1 + trial % 3;
        const int T = 1 + trial % 8;
        const auto m = oracle::random_model(rng, N, 2 + trial % 3);
        const auto t = sample_trace(m, static_cast<std::size_t>(T), 100 + static_cast<std::uint64_t>(trial));
        const double expected = std::log(oracle::brute_force_likelihood(m, t.samples, 10.0));
        const auto fb = forward_backward(m, t);
        EXPECT_NEAR(fb.log_likelihood, expected, 1e-10 * std::max(1.0, std::abs(expected))) << "trial " << trial;

        const Eigen::MatrixXd post = fb.posteriors();
        for (int s = 0; s < T; ++s) EXPECT_NEAR(post.row(s).sum(), 1.0, 1e-12);
    }
}

TEST(ForwardBackward, SmoothedPosteriorsMatchEnumeration) {
    std::mt19937_64 rng(77);
    const auto m = oracle::random_model(rng, 3, 3);
    const auto t = sample_trace(m, 5, 8);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 3);
    oracle::enumerate_paths(m, t.samples, 10.0, [&](const std::vector<int>& path, double p) {
        for (int s = 0; s < 5; ++s) expected(s, path[static_cast<std::size_t>(s)]) += p;
    });
    for (int s = 0; s < 5; ++s) expected.row(s) /= expected.row(s).sum();
    EXPECT_LT((forward_backward(m, t).posteriors() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ForwardBackward, UnderflowNamesTheStep) {
    auto m = single_gaussian(50.0, 1.0);
    const auto t = trace_of({50.0, 51.0, kDefaultMask, 49.0});
    try {
        forward_backward(m, t);
        FAIL() << "expected UnderflowError";
    } catch (const UnderflowError& e) {
        EXPECT_EQ(e.step(), 2u);
    }
}

TEST(Filter, MatchesEnumeratedMarginals) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const int N = 2 + trial % 2;
        const auto m = oracle::random_model(rng, N, 3);
        const auto t = sample_trace(m, 6, 500 + static_cast<std::uint64_t>(trial));
        FilterState f = initial_filter(m);
        for (std::size_t s = 0; s < t.size(); ++s) {
            f = filter_update(m, f, t.samples[s]);
            const std::vector<double> prefix(t.samples.begin(), t.samples.begin() + static_cast<long>(s) + 1);
            const Eigen::VectorXd expected = oracle::brute_force_filtered(m, prefix, 10.0);
            EXPECT_LT((f.alpha - expected).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_EQ(f.last_state, oracle::first_argmax(expected));
            EXPECT_NEAR(f.alpha.sum(), 1.0, 1e-12);
            EXPECT_EQ(f.t, static_cast<long>(s) + 1);
        }
    }
}

TEST(Viterbi, PrintedModelPrediction) {
    const auto m = reference_model();
    const auto p = predict_from_state(m, 0);
    EXPECT_EQ(p.next_state, 0);
    EXPECT_EQ(p.component, 1);
    EXPECT_FALSE(p.dropout);
    EXPECT_DOUBLE_EQ(p.delay_ms, 49.85);
}

TEST(Viterbi, IdentityTransitionsKeepTheState) {
    std::mt19937_64 rng(2);
    auto m = oracle::random_model(rng, 3, 3);
    m.trans.setIdentity();
    for (int s = 0; s < 3; ++s) EXPECT_EQ(predict_from_state(m, s).next_state, s);
}

TEST(Viterbi, DominantDiracPredictsDropout) {
    auto m = single_gaussian(50.0, 2.0);
    m.mix << 0.4, 0.6;
    const auto p = predict_from_state(m, 0);
    EXPECT_TRUE(p.dropout);
    EXPECT_EQ(p.delay_ms, m.mask);
}

TEST(Viterbi, OutputIsACodebookMeanOrDropout) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = oracle::random_model(rng, 3, 4);
        const auto t = sample_trace(m, 20, static_cast<std::uint64_t>(trial));
        FilterState f = initial_filter(m);
        for (double x : t.samples) {
            const auto step = viterbi_predict(m, f, x);
            f = step.filter;
            if (step.prediction.dropout) {
                EXPECT_EQ(step.prediction.component, m.dirac());
            } else {
                bool found = false;
                for (int g = 0; g < m.n_gaussians(); ++g) found |= step.prediction.delay_ms == m.mu[g];
                EXPECT_TRUE(found);
            }
            EXPECT_EQ(step.prediction.prev_state, f.last_state);
        }
    }
}

TEST(Viterbi, TieGoesToLowestIndex) {
    auto m = single_gaussian(50.0, 2.0);
    m.n_mixtures = 3;
    m.mix = (Eigen::MatrixXd(1, 3) << 0.4, 0.4, 0.2).finished();
    m.mu = Eigen::Vector3d(45.0, 55.0, kDefaultMask);
    m.sigma = Eigen::Vector3d(1.0, 1.0, kDiracSigma);
    EXPECT_EQ(predict_from_state(m, 0).component, 0);
}

TEST(PrevDelay, ExactMatchAtLagZero) {
    const std::vector<LaggedState> h{{0, Eigen::Vector2d(1, 2)}, {1, Eigen::Vector2d(0, 0)}};
    EXPECT_EQ(estimate_prev_delay(Eigen::Vector2d(1, 2), h, 10), 0);
}

TEST(PrevDelay, NearestHistoryEntry) {
    const std::vector<LaggedState> h{
        {0, Eigen::Vector2d(1.0, 0.0)}, {1, Eigen::Vector2d(0.5, 0.0)}, {2, Eigen::Vector2d(0.0, 0.0)}};
    EXPECT_EQ(estimate_prev_delay(Eigen::Vector2d(0.4, 0.0), h, 10), 1);
}

TEST(PrevDelay, TiesGoToSmallestLag) {
    const std::vector<LaggedState> h{{0, Eigen::VectorXd::Constant(1, 5.0)},
                                     {1, Eigen::VectorXd::Constant(1, 3.0)},
                                     {2, Eigen::VectorXd::Constant(1, 1.0)},
                                     {3, Eigen::VectorXd::Constant(1, 1.0)}};
    EXPECT_EQ(estimate_prev_delay(Eigen::VectorXd::Constant(1, 1.0), h, 10), 2);
}

TEST(PrevDelay, RespectsDepthAndRejectsEmptyHistory) {
    const std::vector<LaggedState> h{{0, Eigen::VectorXd::Constant(1, 5.0)}, {4, Eigen::VectorXd::Constant(1, 1.0)}};
    EXPECT_EQ(estimate_prev_delay(Eigen::VectorXd::Constant(1, 1.0), h, 3), 0);
    EXPECT_THROW(estimate_prev_delay(Eigen::VectorXd::Constant(1, 1.0), {}, 3), DomainError);
}

TEST(Sampling, DeterministicAndAllDiracGivesMask) {
    const auto m = reference_model();
    EXPECT_EQ(sample_trace(m, 200, 4).samples, sample_trace(m, 200, 4).samples);
    EXPECT_NE(sample_trace(m, 200, 4).samples, sample_trace(m, 200, 5).samples);

    auto d = single_gaussian(50.0, 2.0);
    d.mix << 0.0, 1.0;
    for (double x : sample_trace(d, 100, 1).samples) EXPECT_EQ(x, kDefaultMask);
}

TEST(Sampling, TinySigmaConcentratesOnMean) {
    const auto m = single_gaussian(50.0, 1e-9);
    for (double x : sample_trace(m, 100, 3).samples) EXPECT_NEAR(x, 50.0, 1e-6);
}

TEST(Sampling, DropoutFractionMatchesStationaryWeight) {
    const auto m = reference_model();
    const auto t = sample_trace(m, 100000, 17);
    double drops = 0;
    for (std::size_t s = 0; s < t.size(); ++s) drops += t.is_dropout(s) ? 1.0 : 0.0;
    EXPECT_NEAR(drops / static_cast<double>(t.size()), stationary_dropout_probability(m), 0.005);
}
