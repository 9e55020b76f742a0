#include <gtest/gtest.h>

#include "gcdtc/codec/schedule.hpp"
#include "gcdtc/util/rng.hpp"

using namespace gcdtc;
using namespace gcdtc::codec;

TEST(Schedule, EndpointsAndFirstAlphaBar) {
    auto s = build_schedule(1000, 1e-5, 5e-3);
    EXPECT_DOUBLE_EQ(s.beta(1), 1e-5);
    EXPECT_DOUBLE_EQ(s.beta(1000), 5e-3);
    EXPECT_DOUBLE_EQ(s.alpha_bar(1), 1.0 - 1e-5);
}

TEST(Schedule, FinalAlphaBarMatchesDirectProduct) {
    auto s = build_schedule(1000, 1e-5, 5e-3);
    // Independent oracle: direct product of (1 - beta_t) in 64-bit.
    double prod = 1.0;
    for (int t = 1; t <= 1000; ++t) {
        double beta = 1e-5 + (t - 1) / 999.0 * (5e-3 - 1e-5);
        prod *= 1.0 - beta;
    }
    EXPECT_NEAR(s.alpha_bar(1000), prod, 1e-12);
    EXPECT_NEAR(s.alpha_bar(1000), 0.0817, 5e-4);
}

TEST(Schedule, MonotoneAndInUnitInterval) {
    auto s = build_schedule(500, 1e-5, 5e-3);
    for (int t = 1; t <= 500; ++t) {
        EXPECT_GT(s.beta(t), 0.0);
        EXPECT_LT(s.beta(t), 1.0);
        EXPECT_GT(s.alpha_bar(t), 0.0);
        EXPECT_LT(s.alpha_bar(t), 1.0);
        if (t > 1) {
            EXPECT_GT(s.beta(t), s.beta(t - 1));
            EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
        }
    }
}

TEST(Schedule, ParameterValidation) {
    EXPECT_THROW(build_schedule(0), std::invalid_argument);
    EXPECT_THROW(build_schedule(10, 5e-3, 1e-5), std::invalid_argument);
    EXPECT_THROW(build_schedule(10, 0.0, 5e-3), std::invalid_argument);
    EXPECT_THROW(build_schedule(10, 1e-5, 1.0), std::invalid_argument);
}

TEST(ForwardSample, ZeroNoiseScalesSignal) {
    auto s = build_schedule(100, 1e-4, 2e-2);
    nn::Tensor x0({2, 3});
    for (size_t i = 0; i < x0.size(); ++i) x0[i] = 0.5 * (i + 1);
    nn::Tensor eps({2, 3});
    auto xt = forward_sample(x0, 40, eps, s);
    double cs = std::sqrt(s.alpha_bar(40));
    for (size_t i = 0; i < x0.size(); ++i) EXPECT_DOUBLE_EQ(xt[i], cs * x0[i]);
}

TEST(ForwardSample, ZeroSignalScalesNoise) {
    auto s = build_schedule(100, 1e-4, 2e-2);
    nn::Tensor x0({4});
    nn::Tensor eps({4});
    Rng rng(1);
    for (size_t i = 0; i < eps.size(); ++i) eps[i] = rng.gaussian();
    auto xt = forward_sample(x0, 77, eps, s);
    double cn = std::sqrt(1.0 - s.alpha_bar(77));
    for (size_t i = 0; i < eps.size(); ++i) EXPECT_DOUBLE_EQ(xt[i], cn * eps[i]);
}

TEST(ForwardSample, StepOutOfRangeFails) {
    auto s = build_schedule(10);
    nn::Tensor x0({1}), eps({1});
    EXPECT_THROW(forward_sample(x0, 0, eps, s), std::out_of_range);
    EXPECT_THROW(forward_sample(x0, 11, eps, s), std::out_of_range);
}

// Monte Carlo marginal statistics of the forward process; the acceptance
// suite re-runs this at t in {1, T/2, T}.
TEST(ForwardSample, MonteCarloMarginals) {
    auto s = build_schedule(200, 1e-5, 5e-3);
    const double x0v = 0.7;
    nn::Tensor x0({1});
    x0[0] = x0v;
    Rng rng(123);
    const int draws = 10000;
    for (int t : {1, 100, 200}) {
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            nn::Tensor eps({1});
            eps[0] = rng.gaussian();
            double v = forward_sample(x0, t, eps, s)[0];
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / draws;
        double var = sum2 / draws - mean * mean;
        double true_mean = std::sqrt(s.alpha_bar(t)) * x0v;
        double sigma = std::sqrt(1.0 - s.alpha_bar(t));
        EXPECT_NEAR(mean, true_mean, 3.0 * sigma / 100.0) << "t=" << t;
        EXPECT_NEAR(var, sigma * sigma, 0.05 * sigma * sigma) << "t=" << t;
    }
}
