#include "mvsim/diagnostics.hpp"
#include "mvsim/error.hpp"
#include "mvsim/forward_solver.hpp"
#include "mvsim/noise.hpp"
#include "mvsim/scenarios.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mvsim;

namespace {

SolverConfig config(std::size_t steps, std::size_t particles, std::uint64_t seed = 1) {
    SolverConfig cfg;
    cfg.steps = steps;
    cfg.particles = particles;
    cfg.seed = seed;
    return cfg;
}

void expect_same(const ForwardSolution& a, const ForwardSolution& b) {
    ASSERT_EQ(a.states.size(), b.states.size());
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.brownian, b.brownian);
}

}  // namespace

TEST(Noise, CounterBasedDraws) {
    const NoiseSource a(3), b(3), c(4);
    EXPECT_EQ(a.normal_for(10, 20), b.normal_for(10, 20));
    EXPECT_NE(a.normal_for(10, 20), c.normal_for(10, 20));
    EXPECT_NE(a.normal_for(10, 20), a.normal_for(10, 21));
    EXPECT_NE(a.normal_for(10, 20), a.normal_for(11, 20));
}

TEST(ForwardSolver, ConstantDynamics) {
    auto cfg = config(20, 50);
    cfg.initial = ConstantInitial{1.0};
    const auto s = simulate_mvsde({ConstantDrift{0.0}, ConstantDiffusion{0.0}}, cfg);
    for (double x : s.states) EXPECT_EQ(x, 1.0);
    EXPECT_EQ(s.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(s.times.back(), 1.0);
}

TEST(ForwardSolver, MeanFieldOdeMean) {
    auto cfg = config(10000, 10);
    cfg.initial = ConstantInitial{1.0};
    const auto s = simulate_mvsde({MeanFieldLinearDrift{-1.0, 0.5}, ConstantDiffusion{0.0}}, cfg);
    const double m = mean_estimate(s.slice(s.steps)).value;
    EXPECT_NEAR(m, std::exp(-0.5), 1e-3);
    // Euler recursion for the mean ODE, computed directly.
    double e = 1.0;
    for (int k = 0; k < 10000; ++k) e *= 1.0 - 0.5 * 1e-4;
    EXPECT_NEAR(m, e, 1e-12);
}

TEST(ForwardSolver, BrownianVariance) {
    auto cfg = config(10, 100000);
    const auto s = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    std::vector<double> sq;
    for (double x : s.slice(s.steps)) sq.push_back(x * x);
    const auto v = oracle::summarize(sq);
    EXPECT_NEAR(v.mean, 1.0, 3.0 * v.std_error);
}

TEST(ForwardSolver, DeterministicAcrossThreads) {
    auto cfg = config(200, 5000, 9);
    cfg.initial = builtin::holder_initial();
    cfg.threads = 1;
    const auto a = simulate_mvsvi_penalized(builtin::holder_coefficients(), builtin::holder_potential(), cfg);
    cfg.threads = 3;
    const auto b = simulate_mvsvi_penalized(builtin::holder_coefficients(), builtin::holder_potential(), cfg);
    expect_same(a, b);
    EXPECT_EQ(a.increments, b.increments);
}

TEST(ForwardSolver, ZeroPotentialMatchesUnconstrained) {
    auto cfg = config(100, 500);
    cfg.initial = builtin::lipschitz_initial();
    const auto plain = simulate_mvsde(builtin::lipschitz_coefficients(), cfg);
    for (auto mode : {PenaltyMode::splitting, PenaltyMode::explicit_euler}) {
        cfg.mode = mode;
        const auto pen = simulate_mvsvi_penalized(builtin::lipschitz_coefficients(), ConvexPotential::zero(), cfg);
        expect_same(plain, pen);
        for (double d : pen.increments) EXPECT_EQ(d, 0.0);
    }
    const auto proj = simulate_reflected_projection(builtin::lipschitz_coefficients(), Interval{}, cfg);
    expect_same(plain, proj);
}

TEST(ForwardSolver, ProjectionMatchesReflectedWalkOracle) {
    // E X_M of the projected scheme equals E max of the Gaussian walk.
    auto cfg = config(100, 100000);
    const auto s = simulate_reflected_projection(builtin::brownian_coefficients(), builtin::half_line().domain(), cfg);
    for (double x : s.states) ASSERT_GE(x, 0.0);
    const auto e = mean_estimate(s.slice(s.steps));
    EXPECT_NEAR(e.value, oracle::reflected_walk_mean(100, 1.0), 3.0 * e.std_error);
}

TEST(ForwardSolver, SaturationOde) {
    // b = 5 pushes out of [0, 1]: X reaches 1 at t = 0.1 and dphi cancels the drift afterwards.
    const auto box = ConvexPotential::indicator_interval(0.0, 1.0);
    double prev = kInf;
    for (double n : {1e2, 1e3, 1e4}) {
        auto cfg = config(1000, 4);
        cfg.initial = ConstantInitial{0.5};
        cfg.penalization = n;
        const auto s = simulate_mvsvi_penalized({ConstantDrift{5.0}, ConstantDiffusion{0.0}}, box, cfg);
        const double overshoot = s.terminal[0] - 1.0;
        EXPECT_GE(overshoot, 0.0);
        EXPECT_LE(overshoot, 5.0 / n + 1e-12);
        EXPECT_LE(overshoot, prev);
        prev = overshoot;
        EXPECT_NEAR(s.phi_variation[0], 5.0 - 0.5, 5.0 / n + 1e-9);
    }
}

TEST(ForwardSolver, UniformStationaryLaw) {
    auto cfg = config(10000, 10000);
    cfg.horizon = 1.0;
    cfg.initial = ConstantInitial{0.0};
    const Interval unit{0.0, 1.0};
    const auto s = simulate_reflected_projection({ConstantDrift{0.0}, ConstantDiffusion{3.0}}, unit, cfg);
    const auto m = EmpiricalMeasure::from_samples(s.slice(s.steps));
    EXPECT_NEAR(m.mean(), 0.5, 0.02);
    EXPECT_NEAR(m.moment(2), 1.0 / 3.0, 0.02);
}

TEST(ForwardSolver, ExplicitStiffnessViolation) {
    auto cfg = config(10, 10);
    cfg.penalization = 100.0;
    cfg.mode = PenaltyMode::explicit_euler;
    try {
        simulate_mvsvi_penalized(builtin::brownian_coefficients(), builtin::half_line(), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StiffnessViolation);
    }
}

TEST(ForwardSolver, BlowUpIsReported) {
    auto cfg = config(100, 10);
    cfg.horizon = 10.0;
    cfg.initial = ConstantInitial{2.0};
    try {
        simulate_mvsde({CustomDrift{[](double, double x, const MeasureStats&) { return x * x * x; }}, ConstantDiffusion{0.0}},
                       cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteState);
    }
}

TEST(ForwardSolver, ConfigValidation) {
    auto cfg = config(0, 10);
    EXPECT_THROW(simulate_mvsde(builtin::brownian_coefficients(), cfg), Error);
    cfg = config(30, 10);
    cfg.crn_fine_steps = 100;
    try {
        simulate_mvsde(builtin::brownian_coefficients(), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
    }
    cfg = config(10, 10);
    cfg.initial = ConstantInitial{-1.0};
    EXPECT_THROW(simulate_reflected_projection(builtin::brownian_coefficients(), Interval{0.0, 1.0}, cfg), Error);
}

TEST(ForwardSolver, CommonRandomNumbersAggregateFineDraws) {
    auto cfg = config(10, 20);
    cfg.crn_fine_steps = 40;
    const auto coarse = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    cfg.steps = 40;
    const auto fine = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t k = 0; k <= 10; ++k) EXPECT_NEAR(coarse.x(i, k), fine.x(i, 4 * k), 1e-12);
    }
}

TEST(ForwardSolver, SummariesWithoutPaths) {
    auto cfg = config(50, 100);
    cfg.store_paths = false;
    const auto s = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    EXPECT_FALSE(s.has_paths);
    EXPECT_EQ(s.terminal.size(), 100u);
    EXPECT_EQ(s.slice(50).size(), 100u);
    EXPECT_THROW(s.slice(10), Error);
}
