#include "mvsim/error.hpp"
#include "mvsim/measures.hpp"
#include "mvsim/properties.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace mvsim;

namespace {

std::vector<double> as_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

EmpiricalMeasure em(std::vector<double> v) { return EmpiricalMeasure::from_samples(v); }

}  // namespace

TEST(EmpiricalMeasure, SortsAndKeepsTies) {
    EXPECT_EQ(as_vec(em({3, 1, 2}).samples()), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(as_vec(em({5}).samples()), (std::vector<double>{5}));
    EXPECT_EQ(as_vec(em({0, 0}).samples()), (std::vector<double>{0, 0}));
}

TEST(EmpiricalMeasure, RejectsBadSamples) {
    try {
        em({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptySample);
    }
    try {
        em({1.0, std::nan("")});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteSample);
    }
}

TEST(EmpiricalMeasure, Moments) {
    EXPECT_DOUBLE_EQ(em({-2, 2}).moment(1), 2.0);
    EXPECT_DOUBLE_EQ(em({0}).moment(3.5), 0.0);
    EXPECT_DOUBLE_EQ(em({1, 3}).moment(2), 5.0);
    EXPECT_DOUBLE_EQ(em({1, 3}).mean(), 2.0);
}

TEST(Wasserstein, Examples) {
    EXPECT_NEAR(wasserstein(1, em({0, 1}), em({0.5, 1.5})), 0.5, 1e-15);
    EXPECT_NEAR(oracle::transport_flow_wasserstein(1, {0, 1}, {0.5, 1.5}), 0.5, 1e-15);
    const auto mu = em({0.3, -1.2, 4.0});
    EXPECT_EQ(wasserstein(2, mu, mu), 0.0);
    EXPECT_DOUBLE_EQ(wasserstein(1, em({0}), em({3})), 3.0);
    try {
        wasserstein(0.5, mu, mu);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidOrder);
    }
}

// Quantile coupling against an independent min-cost-flow transport solver.
TEST(Wasserstein, MatchesTransportFlow) {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<int> size(1, 6), atom(-3, 3);
    for (int c = 0; c < 300; ++c) {
        std::vector<double> x(size(gen)), y(size(gen));
        for (auto& v : x) v = atom(gen);
        for (auto& v : y) v = atom(gen);
        for (double p : {1.0, 2.0, 3.0}) {
            const double ref = oracle::transport_flow_wasserstein(p, x, y);
            EXPECT_NEAR(wasserstein(p, em(x), em(y)), ref, 1e-10);
            EXPECT_NEAR(transport_lp_wasserstein(p, x, y), ref, 1e-10);
        }
    }
}

TEST(Wasserstein, MetricAxiomsAndCouplingBound) {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<int> size(1, 8);
    std::normal_distribution<double> z;
    for (int c = 0; c < 200; ++c) {
        auto draw = [&](int n) {
            std::vector<double> v(n);
            for (auto& x : v) x = z(gen);
            return v;
        };
        const auto a = em(draw(size(gen))), b = em(draw(size(gen))), d = em(draw(size(gen)));
        for (double p : {1.0, 2.0}) {
            EXPECT_EQ(wasserstein(p, a, b), wasserstein(p, b, a));
            EXPECT_LE(wasserstein(p, a, d), wasserstein(p, a, b) + wasserstein(p, b, d) + 1e-12);
        }
        const int n = size(gen);
        auto x = draw(n), y = draw(n);
        const double w = wasserstein(1, em(x), em(y));
        for (int perm = 0; perm <= 100; ++perm) {
            double pair = 0.0;
            for (int i = 0; i < n; ++i) pair += std::abs(x[i] - y[i]);
            EXPECT_LE(w, pair / n + 1e-12);
            std::shuffle(y.begin(), y.end(), gen);
        }
    }
}

TEST(MeasureStats, Summaries) {
    const std::vector<double> v{-1.0, 3.0};
    const auto s = MeasureStats::of(v);
    EXPECT_DOUBLE_EQ(s.mean, 1.0);
    EXPECT_DOUBLE_EQ(s.abs_moment1, 2.0);
    EXPECT_DOUBLE_EQ(s.abs_moment2, 5.0);
    EXPECT_EQ(s.samples.size(), 2u);
}
