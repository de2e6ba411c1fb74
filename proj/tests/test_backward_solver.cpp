#include "mvsim/backward_solver.hpp"
#include "mvsim/diagnostics.hpp"
#include "mvsim/error.hpp"
#include "mvsim/scenarios.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mvsim;

namespace {

ForwardSolution brownian(std::size_t steps, std::size_t particles, double x0 = 0.0, std::uint64_t seed = 1) {
    SolverConfig cfg;
    cfg.steps = steps;
    cfg.particles = particles;
    cfg.seed = seed;
    cfg.initial = ConstantInitial{x0};
    return simulate_mvsde(builtin::brownian_coefficients(), cfg);
}

}  // namespace

TEST(Regression, ReproducesPolynomials) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> z;
    std::vector<double> x(3000), lin(3000), cub(3000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = 3.0 + 2.0 * z(gen);
        lin[i] = 1.5 * x[i] - 2.0;
        cub[i] = x[i] * x[i] * x[i] - x[i];
    }
    RegressionConfig reg;
    const auto fl = regress(x, lin, reg);
    const auto fc = regress(x, cub, reg);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(fl[i], lin[i], 1e-6);
        EXPECT_NEAR(fc[i], cub[i], 1e-5 * (1.0 + std::abs(cub[i])));
    }
}

TEST(Regression, ConstantSliceFallsBackToMean) {
    const std::vector<double> x(100, 0.5);
    std::vector<double> t(100);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    for (double v : regress(x, t, RegressionConfig{})) EXPECT_NEAR(v, 49.5, 1e-7);  // ridge shrinks by a relative 1e-10
}

TEST(Regression, ThreadIndependent) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    std::vector<double> x(10000), t(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = z(gen);
        t[i] = std::sin(x[i]) + z(gen);
    }
    EXPECT_EQ(regress(x, t, RegressionConfig{}, 1), regress(x, t, RegressionConfig{}, 4));
}

TEST(Regression, ConfigBounds) {
    RegressionConfig reg;
    reg.degree = 11;
    EXPECT_THROW(reg.validate(), Error);
    reg.degree = 3;
    reg.ridge = -1.0;
    EXPECT_THROW(reg.validate(), Error);
}

TEST(BackwardSolver, MartingaleIdentity) {
    const auto fwd = brownian(50, 4000);
    BackwardCoefficients bc;  // F = 0, G = x
    const auto bwd = solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), BackwardConfig{});
    const auto [y0, se] = bwd.y0_estimate();
    EXPECT_NEAR(y0, 0.0, 3.0 * se);
    EXPECT_EQ(bwd.sweeps, 1u);
    // Y_k tracks X_k up to the regression noise accumulated over the steps after k.
    for (std::size_t k = 10; k < fwd.steps; k += 10) {
        double gap = 0.0;
        for (std::size_t i = 0; i < fwd.particles; ++i) gap += std::abs(bwd.y(i, k) - fwd.x(i, k));
        EXPECT_LT(gap / static_cast<double>(fwd.particles), 0.05) << "k=" << k;
    }
    for (std::size_t i = 0; i < fwd.particles; ++i) EXPECT_EQ(bwd.y(i, fwd.steps), fwd.x(i, fwd.steps));
}

TEST(BackwardSolver, SquareTerminalAgainstNestedOracle) {
    const auto fwd = brownian(50, 20000);
    BackwardCoefficients bc;
    bc.terminal = SquareTerminal{};
    const auto bwd = solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), BackwardConfig{});
    const auto [y0, se] = bwd.y0_estimate();
    const auto ref = oracle::nested_terminal_value([](double x) { return x * x; }, 1.0, 4000, 200, 17);
    EXPECT_NEAR(ref.mean, 1.0, 3.0 * ref.std_error);
    EXPECT_NEAR(y0, ref.mean, 3.0 * std::hypot(se, ref.std_error) + 2.0 * fwd.dt());
    // Conditional values x^2 + (T - t) in the middle of the grid.
    for (std::size_t i = 0; i < fwd.particles; i += 499) {
        const double x = fwd.x(i, 25);
        if (std::abs(x) < 1.5) { EXPECT_NEAR(bwd.y(i, 25), x * x + 0.5, 0.05); }
    }
}

TEST(BackwardSolver, ImplicitStepClosedForm) {
    EXPECT_NEAR(implicit_penalization_solve(builtin::half_line(), 9.0, 1.0, -1.0), -0.1, 1e-12);
    EXPECT_EQ(implicit_penalization_solve(builtin::half_line(), 9.0, 1.0, 2.0), 2.0);
}

TEST(BackwardSolver, ConstrainedScenario) {
    const auto fwd = brownian(50, 5000);
    BackwardConfig cfg;
    cfg.penalization = 1e3;
    const auto bwd = solve_penalized_bsde(fwd, builtin::constrained_backward(), builtin::half_line(), cfg);
    // Below the boundary Y = w / (1 + dt n) with w about -2 dt, so the
    // violation is O(1/n).
    double lowest = 0.0;
    for (double y : bwd.Y) lowest = std::min(lowest, y);
    EXPECT_GE(lowest, -4.0 / cfg.penalization);
    EXPECT_LE(bwd.mean_violation(), 2.0 / cfg.penalization);
    for (double d : bwd.phi2) EXPECT_LE(d, 1e-12);  // the constraint only pushes up
    const auto vi = vi_residual(bwd, builtin::half_line(), constant_path(1.0));
    EXPECT_LE(vi.max_residual, vi.tolerance);
}

TEST(BackwardSolver, PicardSweepsForLawDependence) {
    const auto fwd = brownian(20, 2000);
    BackwardCoefficients bc;
    bc.driver = LinearDriver{0.5, 0.0, 0.0, 0.5, 0.0};
    BackwardConfig cfg;
    cfg.picard_sweeps = 30;
    cfg.picard_tolerance = 1e-10;
    const auto bwd = solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), cfg);
    EXPECT_TRUE(bwd.picard_converged);
    EXPECT_GT(bwd.sweeps, 1u);
    // Linear driver y + mean(Y) with G = x and E X = 0: Y_0 stays near 0.
    EXPECT_NEAR(bwd.y0_estimate().first, 0.0, 0.1);

    cfg.picard_sweeps = 2;
    cfg.picard_tolerance = 1e-14;
    const auto flagged = solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), cfg);
    EXPECT_FALSE(flagged.picard_converged);
    cfg.strict_picard = true;
    try {
        solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PicardNonconvergence);
    }
}

TEST(BackwardSolver, TruncationSwitchesDriverOff) {
    const auto fwd = brownian(20, 1000);
    BackwardCoefficients bc;
    bc.driver = LinearDriver{0.0, 0.0, 0.0, 0.0, 1.0};
    BackwardConfig cfg;
    cfg.truncation = 1e-9;  // every path exits after the first step
    const auto off = solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), cfg);
    cfg.truncation = kInf;
    const auto on = solve_penalized_bsde(fwd, bc, ConvexPotential::zero(), cfg);
    EXPECT_NEAR(on.y0_estimate().first - off.y0_estimate().first, 1.0 - fwd.dt(), 1e-6);
}

TEST(BackwardSolver, ThreadIndependent) {
    const auto fwd = brownian(30, 6000);
    BackwardConfig cfg;
    cfg.penalization = 100.0;
    cfg.threads = 1;
    const auto a = solve_penalized_bsde(fwd, builtin::constrained_backward(), builtin::half_line(), cfg);
    cfg.threads = 3;
    const auto b = solve_penalized_bsde(fwd, builtin::constrained_backward(), builtin::half_line(), cfg);
    EXPECT_EQ(a.Y, b.Y);
    EXPECT_EQ(a.Z, b.Z);
}

TEST(BackwardSolver, NeedsPaths) {
    SolverConfig cfg;
    cfg.steps = 10;
    cfg.particles = 10;
    cfg.store_paths = false;
    const auto fwd = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    EXPECT_THROW(solve_penalized_bsde(fwd, BackwardCoefficients{}, ConvexPotential::zero(), BackwardConfig{}), Error);
}
