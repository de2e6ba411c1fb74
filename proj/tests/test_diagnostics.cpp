#include "mvsim/diagnostics.hpp"
#include "mvsim/error.hpp"
#include "mvsim/properties.hpp"
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

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(YamadaWatanabe, Examples) {
    const YamadaWatanabeFn v(0.1, 2.0);
    EXPECT_EQ(v.eval(0.0), 0.0);
    EXPECT_EQ(v.d1(0.0), 0.0);
    EXPECT_NEAR(v.d1(0.1), 1.0, 1e-12);
    EXPECT_NEAR(v.d1(-0.3), -1.0, 1e-12);
    EXPECT_GE(v.eval(1.0), 0.9);
    EXPECT_LE(v.eval(1.0), 1.0);
    EXPECT_THROW(YamadaWatanabeFn(0.0, 2.0), Error);
    EXPECT_THROW(YamadaWatanabeFn(0.1, 1.0), Error);
}

// V' and V rebuilt from the density by quadrature.
TEST(YamadaWatanabe, MatchesQuadrature) {
    for (double eps : {0.1, 0.01}) {
        for (double delta : {2.0, 4.0}) {
            const YamadaWatanabeFn v(eps, delta);
            const auto& s = v.breakpoints();
            auto phi = [&](double x) { return v.density(x); };
            double mass = 0.0;
            for (int j = 0; j < 3; ++j) mass += oracle::simpson(phi, s[j], s[j + 1]);
            EXPECT_NEAR(mass, 1.0, 1e-10);
            for (double x : {0.3 * eps, 0.55 * eps, 0.9 * eps, 1.7 * eps}) {
                double dv = 0.0;
                for (int j = 0; j < 3; ++j) {
                    const double a = s[j], b = std::min(s[j + 1], x);
                    if (b > a) dv += oracle::simpson(phi, a, b);
                }
                EXPECT_NEAR(v.d1(x), dv, 1e-10);
                const double val = oracle::simpson([&](double u) { return v.d1(u); }, 0.0, x, 20000);
                EXPECT_NEAR(v.eval(x), val, 1e-9 * (1.0 + x));
                EXPECT_NEAR(v.eval(-x), v.eval(x), 1e-15);
            }
        }
    }
}

TEST(YamadaWatanabe, Bounds) {
    for (double eps : {0.1, 0.01}) {
        for (double delta : {2.0, 4.0}) {
            const YamadaWatanabeFn v(eps, delta);
            for (int j = 0; j < 10000; ++j) {
                const double x = -2.0 + 4.0 * j / 9999.0;
                const double ax = std::abs(x);
                EXPECT_LE(ax - eps, v.eval(x) + 1e-10);
                EXPECT_LE(v.eval(x), ax + 1e-10);
                const double s = (x > 0) - (x < 0);
                EXPECT_GE(s * v.d1(x), -1e-10);
                EXPECT_LE(s * v.d1(x), 1.0 + 1e-10);
                EXPECT_GE(v.d2(x), -1e-10);
                if (ax > 0) { EXPECT_LE(v.d2(x), 2.0 / (ax * std::log(delta)) + 1e-10); }
                if (ax < eps / delta || ax > eps) { EXPECT_EQ(v.d2(x), 0.0); }
            }
        }
    }
}

TEST(Estimates, MeanAndError) {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto e = mean_estimate(v);
    EXPECT_DOUBLE_EQ(e.value, 2.5);
    EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(CauchyGap, Contracts) {
    auto cfg = config(20, 100);
    const auto a = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    EXPECT_EQ(cauchy_gap(a, a, 2.0), 0.0);
    auto other = cfg;
    other.seed = 2;
    const auto b = simulate_mvsde(builtin::brownian_coefficients(), other);
    EXPECT_EQ(code_of([&] { cauchy_gap(a, b, 2.0); }), ErrorCode::SeedMismatch);
    auto odd = cfg;
    odd.steps = 30;
    const auto c = simulate_mvsde(builtin::brownian_coefficients(), odd);
    EXPECT_EQ(code_of([&] { cauchy_gap(a, c, 2.0); }), ErrorCode::GridMismatch);
    EXPECT_EQ(code_of([&] { cauchy_gap(a, a, 0.5); }), ErrorCode::InvalidOrder);
}

TEST(CauchyGap, LipschitzGapsDecrease) {
    auto run = [](std::size_t m) {
        auto cfg = config(m, 5000);
        cfg.initial = builtin::lipschitz_initial();
        cfg.crn_fine_steps = 800;
        cfg.store_paths = true;
        return simulate_mvsde(builtin::lipschitz_coefficients(), cfg);
    };
    double prev = kInf;
    auto coarse = run(100);
    for (std::size_t m : {100, 200, 400}) {
        auto fine = run(2 * m);
        const double g = cauchy_gap(coarse, fine, 2.0);
        EXPECT_GT(g, 0.0);
        EXPECT_LT(g, prev);
        prev = g;
        coarse = std::move(fine);
    }
}

TEST(Moments, Examples) {
    const double p4[] = {4.0};
    auto cfg = config(10, 10);
    cfg.initial = ConstantInitial{1.0};
    const auto one = simulate_mvsde({ConstantDrift{}, ConstantDiffusion{}}, cfg);
    const auto r = moment_report(one, p4);
    EXPECT_DOUBLE_EQ(r.entries[0].estimator.value, 1.0);
    EXPECT_DOUBLE_EQ(r.entries[0].ratio, 0.5);

    cfg.initial = ConstantInitial{0.0};
    cfg.particles = 200;
    const auto bm = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    const auto rb = moment_report(bm, p4);
    EXPECT_EQ(rb.entries[0].reference, 0.0);
    EXPECT_EQ(rb.entries[0].ratio, rb.entries[0].estimator.value);
}

TEST(Moments, BrownianSupSquare) {
    const double p2[] = {2.0};
    auto cfg = config(250, 20000);
    cfg.store_paths = false;
    const auto s = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    const auto est = moment_report(s, p2).entries[0].estimator;
    const auto ref = oracle::brownian_sup_square(200000, 250, 1.0, 23);
    EXPECT_NEAR(est.value, ref.mean, 3.0 * std::hypot(est.std_error, ref.std_error));
}

TEST(RateFit, Examples) {
    std::vector<std::pair<double, double>> exact, flat;
    for (double m : {50.0, 100.0, 200.0, 400.0}) {
        exact.emplace_back(m, 3.0 / std::sqrt(m));
        flat.emplace_back(m, 0.2);
    }
    EXPECT_NEAR(rate_fit(exact).slope, -0.5, 1e-12);
    EXPECT_NEAR(rate_fit(flat).slope, 0.0, 1e-12);
    exact.resize(2);
    EXPECT_EQ(code_of([&] { rate_fit(exact); }), ErrorCode::InsufficientSweep);
}

TEST(PenalizationGrowth, ZeroPotentialAndSinglePoint) {
    std::vector<ForwardSolution> runs;
    const std::vector<double> levels{1e2, 1e3, 1e4};
    for (double n : levels) {
        auto cfg = config(20, 50);
        cfg.penalization = n;
        runs.push_back(simulate_mvsvi_penalized(builtin::brownian_coefficients(), ConvexPotential::zero(), cfg));
    }
    std::vector<std::pair<double, const ForwardSolution*>> sweep;
    for (std::size_t j = 0; j < 3; ++j) sweep.emplace_back(levels[j], &runs[j]);
    const auto g = penalization_growth(sweep);
    EXPECT_TRUE(g.degenerate_zero);
    for (const auto& v : g.values) EXPECT_EQ(v.value, 0.0);
    sweep.resize(1);
    EXPECT_EQ(code_of([&] { penalization_growth(sweep); }), ErrorCode::InsufficientSweep);
}

TEST(ViResidual, Examples) {
    auto cfg = config(100, 500);
    const auto plain = simulate_mvsde(builtin::brownian_coefficients(), cfg);
    const auto r0 = vi_residual(plain, ConvexPotential::zero(), constant_path(0.7));
    for (double r : r0.residuals) EXPECT_EQ(r, 0.0);

    const auto proj = simulate_reflected_projection(builtin::brownian_coefficients(), builtin::half_line().domain(), cfg);
    const auto r1 = vi_residual(proj, builtin::half_line(), constant_path(1.0));
    EXPECT_LE(r1.max_residual, 1e-6);
    EXPECT_TRUE(r1.pass);

    cfg.initial = ConstantInitial{0.5};
    const auto box = ConvexPotential::indicator_interval(0.0, 1.0);
    const auto split = simulate_mvsvi_penalized(builtin::brownian_coefficients(), box, cfg);
    EXPECT_EQ(code_of([&] { vi_residual(split, box, constant_path(2.0)); }), ErrorCode::TestPathOutsideDomain);
    for (double c : {0.1, 0.5, 0.9}) EXPECT_TRUE(vi_residual(split, box, constant_path(c)).pass);
}

TEST(ViResidual, MonotoneCoupling) {
    auto a = config(200, 1000), b = config(200, 1000, 2);
    b.initial = ConstantInitial{0.4};
    const auto pa = simulate_reflected_projection(builtin::brownian_coefficients(), builtin::half_line().domain(), a);
    const auto pb = simulate_reflected_projection(builtin::brownian_coefficients(), builtin::half_line().domain(), b);
    for (double c : monotone_coupling(pa, pb)) EXPECT_GE(c, -1e-9);
}

TEST(Properties, FastSuitesPass) {
    for (const std::string name : {"convex", "yw", "wasserstein", "vi"}) {
        for (const auto& c : run_suite(name)) EXPECT_TRUE(c.pass) << c.suite << "/" << c.name << ": " << c.detail;
    }
    EXPECT_EQ(code_of([] { run_suite("nosuch"); }), ErrorCode::UnknownSuite);
}
