#include "mvsim/properties.hpp"

#include "mvsim/diagnostics.hpp"
#include "mvsim/error.hpp"
#include "mvsim/measures.hpp"
#include "mvsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace mvsim {

namespace {

/// Passing means measured <= threshold.
PropertyCheck at_most(std::string suite, std::string name, double measured, double threshold,
                      std::string detail = {}) {
    PropertyCheck c;
    c.suite = std::move(suite);
    c.name = std::move(name);
    c.measured = measured;
    c.threshold = threshold;
    c.margin = threshold - measured;
    c.pass = measured <= threshold;
    c.detail = std::move(detail);
    return c;
}

/// Passing means measured >= threshold.
PropertyCheck at_least(std::string suite, std::string name, double measured, double threshold,
                       std::string detail = {}) {
    auto c = at_most(std::move(suite), std::move(name), measured, threshold, std::move(detail));
    c.margin = measured - threshold;
    c.pass = measured >= threshold;
    return c;
}

PropertyCheck flag(std::string suite, std::string name, bool ok, std::string detail = {}) {
    return at_least(std::move(suite), std::move(name), ok ? 1.0 : 0.0, 1.0, std::move(detail));
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

double spread_ratio(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

// ---------------------------------------------------------------------------
// convex
// ---------------------------------------------------------------------------

struct LabeledPotential {
    std::string label;
    ConvexPotential psi;
    double tol;
};

std::vector<LabeledPotential> convex_corpus() {
    std::vector<LabeledPotential> out;
    out.push_back({"indicator[-1,2]", ConvexPotential::indicator_interval(-1.0, 2.0), 1e-9});
    out.push_back({"indicator[0,inf)", ConvexPotential::indicator_interval(0.0, kInf), 1e-9});
    out.push_back({"abs_power(1,1)", ConvexPotential::abs_power(1.0, 1.0), 1e-9});
    out.push_back({"abs_power(2,0.5)", ConvexPotential::abs_power(2.0, 0.5), 1e-9});
    out.push_back({"abs_power(1.5,1)", ConvexPotential::abs_power(1.5, 1.0), 1e-9});
    out.push_back({"abs_power(3,0.25)", ConvexPotential::abs_power(3.0, 0.25), 1e-9});
    out.push_back({"max_affine", ConvexPotential::max_affine({{-1.0, 0.0}, {0.5, 0.0}, {2.0, -1.0}}), 1e-9});
    out.push_back({"custom_cosh",
                   ConvexPotential::custom([](double x) { return std::cosh(x) - 1.0; }, Interval{}), 1e-6});
    return out;
}

void convex_checks(const LabeledPotential& lp, std::vector<PropertyCheck>& out) {
    const std::string suite = "convex";
    const auto& psi = lp.psi;
    const double tol = lp.tol;
    const std::vector<double> levels{1.0, 4.0, 16.0, 256.0};
    const auto xs = linspace(-4.0, 4.0, 1000);
    const std::size_t nx = xs.size(), nl = levels.size();

    std::vector<std::vector<double>> J(nl, std::vector<double>(nx)), G = J, E = J;
    for (std::size_t l = 0; l < nl; ++l) {
        for (std::size_t i = 0; i < nx; ++i) {
            J[l][i] = psi.prox(xs[i], levels[l]);
            G[l][i] = levels[l] * (xs[i] - J[l][i]);
            E[l][i] = psi.moreau(xs[i], levels[l]);
        }
    }

    double cross = 0.0, lip = 0.0, nonexp = 0.0, env = 0.0, sandwich = 0.0, limit = 0.0, mono = 0.0;
    for (std::size_t a = 0; a < nl; ++a) {
        for (std::size_t b = 0; b < nl; ++b) {
            const double c = 1.0 / levels[a] + 1.0 / levels[b];
            for (std::size_t i = 0; i < nx; ++i) {
                for (std::size_t j = 0; j < nx; ++j) {
                    const double lhs = (xs[i] - xs[j]) * (G[a][i] - G[b][j]);
                    const double rhs = -c * G[a][i] * G[b][j];
                    cross = std::max(cross, (rhs - lhs) / (1.0 + std::abs(lhs) + std::abs(rhs)));
                }
            }
        }
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = i + 1; j < nx; ++j) {
                const double dx = std::abs(xs[i] - xs[j]);
                const double dg = std::abs(G[a][i] - G[a][j]);
                lip = std::max(lip, (dg - levels[a] * dx) / (1.0 + levels[a] * dx));
                nonexp = std::max(nonexp, (std::abs(J[a][i] - J[a][j]) - dx) / (1.0 + dx));
            }
            const double psi_j = psi.eval(J[a][i]);
            const double identity = psi_j + G[a][i] * G[a][i] / (2.0 * levels[a]);
            env = std::max(env, std::abs(E[a][i] - identity) / (1.0 + std::abs(E[a][i])));
            const double psi_x = psi.eval(xs[i]);
            sandwich = std::max(sandwich, (psi_j - E[a][i]) / (1.0 + std::abs(E[a][i])));
            if (std::isfinite(psi_x)) sandwich = std::max(sandwich, (E[a][i] - psi_x) / (1.0 + std::abs(psi_x)));
            if (a + 1 < nl) {
                const double here = std::abs(J[a][i] - psi.project(xs[i]));
                const double next = std::abs(J[a + 1][i] - psi.project(xs[i]));
                limit = std::max(limit, next - here);
            }
        }
    }
    double far = 0.0;
    for (double x : xs) far = std::max(far, std::abs(psi.prox(x, 1e6) - psi.project(x)));

    // Monotonicity of the subdifferential on a coarser sample, plus maximality:
    // a slope 0.5 outside the subdifferential at x must be refuted by a pair
    // (x', z') taken from points approaching x from that side.
    const auto ys = linspace(-4.0, 4.0, 201);
    struct Sample {
        double x;
        Interval s;
    };
    std::vector<Sample> samples;
    for (double y : ys) {
        if (auto s = psi.subdifferential(y)) samples.push_back({y, *s});
    }
    auto finite_ends = [](const Interval& s) {
        std::vector<double> v;
        if (std::isfinite(s.lo)) v.push_back(s.lo);
        if (std::isfinite(s.hi)) v.push_back(s.hi);
        if (v.size() == 2) v.push_back(0.5 * (s.lo + s.hi));
        return v;
    };
    for (const auto& p : samples) {
        for (const auto& q : samples) {
            for (double z : finite_ends(p.s)) {
                for (double zq : finite_ends(q.s)) {
                    mono = std::max(mono, -(p.x - q.x) * (z - zq) / (1.0 + std::abs(z) + std::abs(zq)));
                }
            }
        }
    }
    std::size_t unrefuted = 0, probes = 0;
    for (const auto& p : samples) {
        for (int side : {1, -1}) {
            const double end = side > 0 ? p.s.hi : p.s.lo;
            if (!std::isfinite(end)) continue;
            const double z = end + 0.5 * side;
            ++probes;
            bool refuted = false;
            for (int j = 1; j <= 40 && !refuted; ++j) {
                const double xq = p.x + side * std::ldexp(1.0, -j);
                const auto sq = psi.subdifferential(xq);
                if (!sq) continue;
                for (double zq : finite_ends(*sq)) refuted = refuted || (p.x - xq) * (z - zq) < 0.0;
            }
            if (!refuted) ++unrefuted;
        }
    }

    const std::string tag = " [" + lp.label + "]";
    out.push_back(at_most(suite, "cross_monotonicity" + tag, cross, tol));
    out.push_back(at_most(suite, "gradient_lipschitz" + tag, lip, tol));
    out.push_back(at_most(suite, "envelope_identity" + tag, env, tol));
    out.push_back(at_most(suite, "sandwich" + tag, sandwich, tol));
    out.push_back(at_most(suite, "resolvent_nonexpansive" + tag, nonexp, tol));
    out.push_back(at_most(suite, "resolvent_limit_monotone" + tag, limit, tol));
    if (psi.is_indicator()) out.push_back(at_most(suite, "resolvent_limit_1e6" + tag, far, 1e-3));
    out.push_back(at_most(suite, "subdifferential_monotone" + tag, mono, tol));
    out.push_back(at_most(suite, "maximality_spot_check" + tag, static_cast<double>(unrefuted), 0.0,
                          std::to_string(probes) + " probes"));
}

// ---------------------------------------------------------------------------
// yw
// ---------------------------------------------------------------------------

/// Composite Simpson rule on [a, b].
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

void yw_checks(double eps, double delta, std::vector<PropertyCheck>& out) {
    const std::string suite = "yw";
    const YamadaWatanabeFn f(eps, delta);
    const double ld = std::log(delta);
    const auto& s = f.breakpoints();
    std::ostringstream tag;
    tag << " [eps=" << eps << ",delta=" << delta << "]";

    double mass = 0.0;
    for (std::size_t j = 0; j < 3; ++j) mass += simpson([&](double x) { return f.density(x); }, s[j], s[j + 1], 2000);

    double bound_v = 0.0, bound_d1 = 0.0, bound_d2 = 0.0, support = 0.0;
    for (double x : linspace(-2.0, 2.0, 10000)) {
        const double ax = std::abs(x);
        const double v = f.eval(x), d1 = f.d1(x), d2 = f.d2(x);
        bound_v = std::max({bound_v, (ax - eps) - v, v - ax});
        const double sd = x >= 0.0 ? d1 : -d1;
        bound_d1 = std::max({bound_d1, -sd, sd - 1.0});
        if (ax > 0.0) bound_d2 = std::max({bound_d2, -d2, d2 - 2.0 / (ax * ld)});
        if (ax < s[0] || ax > s[3]) support = std::max(support, std::abs(d2));
    }

    // Central differences against the closed forms, away from breakpoints.
    // The allowance is the Taylor remainder with the exact local bound on the
    // next derivative of the density, plus rounding.
    const double h = 1e-4;
    double fd1 = 0.0, fd2 = 0.0;
    for (double x : linspace(0.5 * s[0], 1.5 * s[3], 4000)) {
        bool near = x - 2.0 * h <= 0.0;
        for (double b : s) near = near || std::abs(x - b) <= 2.0 * h;
        if (near) continue;
        const double lo = x - h;
        const bool inside = x > s[0] && x < s[3];
        // |phi'| <= r (1/(ramp lo) + s3/(ramp lo^2)) / ln delta on the support, |phi''| <= 2 r s3 / (ramp lo^3 ln delta).
        const double ramp = s[1] - s[0];
        const double m3 = inside ? f.plateau() * (1.0 / ramp + s[3] / (ramp * lo)) / (lo * ld) : 0.0;
        const double m4 = inside ? 2.0 * f.plateau() * s[3] / (ramp * lo * lo * lo * ld) : 0.0;
        const double c1 = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
        const double c2 = (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h);
        const double allow1 = m3 * h * h / 6.0 + 1e-11;
        const double allow2 = m4 * h * h / 12.0 + 8e-16 * (1.0 + std::abs(f.eval(x))) / (h * h);
        fd1 = std::max(fd1, std::abs(c1 - f.d1(x)) / allow1);
        fd2 = std::max(fd2, std::abs(c2 - f.d2(x)) / allow2);
    }

    out.push_back(at_most(suite, "plateau_at_most_2" + tag.str(), f.plateau(), 2.0));
    out.push_back(at_most(suite, "density_mass_one" + tag.str(), std::abs(mass - 1.0), 1e-10));
    out.push_back(at_most(suite, "v_between_abs_minus_eps_and_abs" + tag.str(), bound_v, 1e-10));
    out.push_back(at_most(suite, "v1_sign_bounded" + tag.str(), bound_d1, 1e-10));
    out.push_back(at_most(suite, "v2_bounded" + tag.str(), bound_d2, 1e-10));
    out.push_back(at_most(suite, "v2_support" + tag.str(), support, 1e-10));
    out.push_back(at_most(suite, "v1_finite_difference_ratio" + tag.str(), fd1, 1.0));
    out.push_back(at_most(suite, "v2_finite_difference_ratio" + tag.str(), fd2, 1.0));
}

// ---------------------------------------------------------------------------
// wasserstein
// ---------------------------------------------------------------------------

/// Minimum-cost perfect matching (Hungarian algorithm with potentials).
double assignment_cost(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double d = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < d) {
                    d = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += d;
                    v[j] -= d;
                } else {
                    minv[j] -= d;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

}  // namespace

double transport_lp_wasserstein(double p, std::span<const double> x, std::span<const double> y) {
    if (p < 1.0) throw Error(ErrorCode::InvalidOrder, "order must be >= 1");
    if (x.empty() || y.empty()) throw Error(ErrorCode::EmptySample, "transport between empty samples");
    const std::size_t l = std::lcm(x.size(), y.size());
    if (l > 2000) throw Error(ErrorCode::InvalidArgument, "replicated transport problem too large");
    const std::size_t rx = l / x.size(), ry = l / y.size();
    std::vector<std::vector<double>> cost(l, std::vector<double>(l));
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) cost[i][j] = std::pow(std::abs(x[i / rx] - y[j / ry]), p);
    }
    return std::pow(assignment_cost(cost) / static_cast<double>(l), 1.0 / p);
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"convex", "yw", "wasserstein", "moments", "penalization", "vi"};
    return names;
}

std::vector<PropertyCheck> convex_suite() {
    std::vector<PropertyCheck> out;
    for (const auto& lp : convex_corpus()) convex_checks(lp, out);
    return out;
}

std::vector<PropertyCheck> yw_suite() {
    std::vector<PropertyCheck> out;
    for (double eps : {0.1, 0.01}) {
        for (double delta : {2.0, 4.0}) yw_checks(eps, delta, out);
    }
    return out;
}

std::vector<PropertyCheck> wasserstein_suite(std::size_t cases, std::uint64_t seed) {
    const std::string suite = "wasserstein";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(1, 6), atom(-3, 3);
    const double orders[] = {1.0, 1.5, 2.0, 3.0};
    auto draw = [&] {
        std::vector<double> v(static_cast<std::size_t>(size(rng)));
        for (double& a : v) a = atom(rng);
        return v;
    };
    double lp_err = 0.0, sym = 0.0, tri = 0.0, coupling = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const double p = orders[c % 4];
        const auto x = draw(), y = draw(), z = draw();
        const auto mx = EmpiricalMeasure::from_samples(x), my = EmpiricalMeasure::from_samples(y),
                   mz = EmpiricalMeasure::from_samples(z);
        const double wxy = wasserstein(p, mx, my);
        lp_err = std::max(lp_err, std::abs(wxy - transport_lp_wasserstein(p, x, y)) / (1.0 + wxy));
        sym = std::max(sym, std::abs(wxy - wasserstein(p, my, mx)));
        tri = std::max(tri, wxy - wasserstein(p, mx, mz) - wasserstein(p, mz, my));
        // Any pairing of equal-size samples bounds W_1 from above.
        auto yy = x;
        for (double& v : yy) v += atom(rng);
        const auto myy = EmpiricalMeasure::from_samples(yy);
        const double w1 = wasserstein(1.0, mx, myy);
        for (int perm = 0; perm < 100; ++perm) {
            std::shuffle(yy.begin(), yy.end(), rng);
            double pair = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) pair += std::abs(x[i] - yy[i]);
            coupling = std::max(coupling, w1 - pair / static_cast<double>(x.size()));
        }
    }
    std::vector<PropertyCheck> out;
    out.push_back(at_most(suite, "transport_lp_agreement", lp_err, 1e-10, std::to_string(cases) + " cases"));
    out.push_back(at_most(suite, "symmetry", sym, 0.0));
    out.push_back(at_most(suite, "triangle_inequality", tri, 1e-12));
    out.push_back(at_most(suite, "coupling_upper_bound", coupling, 1e-12));
    return out;
}

std::vector<PropertyCheck> moments_suite(unsigned threads) {
    const std::string suite = "moments";
    std::vector<PropertyCheck> out;
    const double p4[] = {4.0};

    {
        SolverConfig cfg;
        cfg.steps = 10;
        cfg.particles = 8;
        cfg.seed = 1;
        cfg.initial = ConstantInitial{1.0};
        const auto s = simulate_mvsde({ConstantDrift{0.0}, ConstantDiffusion{0.0}}, cfg);
        const auto r = moment_report(s, p4);
        out.push_back(at_most(suite, "constant_paths_ratio_half", std::abs(r.entries[0].ratio - 0.5), 1e-15));
    }

    std::vector<double> by_steps;
    for (std::size_t m : {50, 100, 200, 400}) {
        SolverConfig cfg;
        cfg.steps = m;
        cfg.particles = 10000;
        cfg.seed = 1;
        cfg.initial = builtin::holder_initial();
        cfg.store_paths = false;
        cfg.threads = threads;
        by_steps.push_back(moment_report(simulate_mvsde(builtin::holder_coefficients(), cfg), p4).entries[0].estimator.value);
    }
    out.push_back(at_most(suite, "holder_sup_moment4_across_steps", spread_ratio(by_steps), 2.0));

    std::vector<double> by_level, variation;
    for (double n : {1e2, 1e3, 1e4}) {
        SolverConfig cfg;
        cfg.steps = 400;
        cfg.particles = 10000;
        cfg.seed = 1;
        cfg.penalization = n;
        cfg.initial = builtin::holder_initial();
        cfg.store_paths = false;
        cfg.threads = threads;
        const auto s = simulate_mvsvi_penalized(builtin::holder_coefficients(), builtin::holder_potential(), cfg);
        by_level.push_back(moment_report(s, p4).entries[0].estimator.value);
        variation.push_back(phi_variation_moment(s).value);
    }
    out.push_back(at_most(suite, "holder_sup_moment4_across_penalization", spread_ratio(by_level), 2.0));
    out.push_back(at_most(suite, "phi_variation_across_penalization", spread_ratio(variation), 2.0));
    return out;
}

std::vector<PropertyCheck> penalization_suite(unsigned threads) {
    const std::string suite = "penalization";
    std::vector<PropertyCheck> out;
    const std::vector<double> levels{1e2, 1e3, 1e4};

    std::vector<ForwardSolution> runs;
    for (double n : levels) {
        SolverConfig cfg;
        cfg.steps = 10000;
        cfg.particles = 2000;
        cfg.seed = 1;
        cfg.penalization = n;
        cfg.mode = PenaltyMode::explicit_euler;
        cfg.store_paths = false;
        cfg.threads = threads;
        runs.push_back(simulate_mvsvi_penalized(builtin::brownian_coefficients(), builtin::half_line(), cfg));
    }
    std::vector<std::pair<double, const ForwardSolution*>> sweep;
    for (std::size_t j = 0; j < levels.size(); ++j) sweep.emplace_back(levels[j], &runs[j]);
    const auto growth = penalization_growth(sweep);
    out.push_back(at_most(suite, "gradient_growth_slope", growth.fit.slope, growth.bound));
    bool monotone = true;
    for (std::size_t j = 1; j < runs.size(); ++j) {
        monotone = monotone && runs[j].terminal_violation() <= runs[j - 1].terminal_violation();
    }
    out.push_back(flag(suite, "violation_nonincreasing", monotone));

    {
        std::vector<ForwardSolution> zero;
        for (double n : levels) {
            SolverConfig cfg;
            cfg.steps = 50;
            cfg.particles = 200;
            cfg.seed = 1;
            cfg.penalization = n;
            zero.push_back(simulate_mvsvi_penalized(builtin::brownian_coefficients(), ConvexPotential::zero(), cfg));
        }
        std::vector<std::pair<double, const ForwardSolution*>> zs;
        for (std::size_t j = 0; j < levels.size(); ++j) zs.emplace_back(levels[j], &zero[j]);
        out.push_back(flag(suite, "zero_potential_degenerate", penalization_growth(zs).degenerate_zero));
    }

    // Backward system: penalization energy, a-priori bound, Cauchy in n.
    SolverConfig fcfg;
    fcfg.steps = 50;
    fcfg.particles = 5000;
    fcfg.seed = 1;
    fcfg.threads = threads;
    const auto fwd = simulate_mvsde(builtin::brownian_coefficients(), fcfg);
    auto solve = [&](double n) {
        BackwardConfig bcfg;
        bcfg.penalization = n;
        bcfg.threads = threads;
        return solve_penalized_bsde(fwd, builtin::constrained_backward(), builtin::half_line(), bcfg);
    };
    std::vector<double> grad, apriori;
    for (double n : levels) {
        const auto e = backward_energy(solve(n));
        grad.push_back(e.grad_energy);
        apriori.push_back(e.sup_y2.value + e.z_energy);
    }
    out.push_back(at_most(suite, "backward_gradient_energy_spread", spread_ratio(grad), 2.0));
    out.push_back(at_most(suite, "backward_apriori_spread", spread_ratio(apriori), 2.0));
    std::vector<double> gaps;
    for (double n : {1e2, 4e2, 1.6e3}) gaps.push_back(backward_sup_gap(solve(n), solve(2.0 * n)).value);
    out.push_back(flag(suite, "backward_cauchy_in_n_decreasing", gaps[1] < gaps[0] && gaps[2] < gaps[1]));
    return out;
}

std::vector<PropertyCheck> vi_suite(unsigned threads) {
    const std::string suite = "vi";
    std::vector<PropertyCheck> out;
    const auto half = builtin::half_line();

    SolverConfig cfg;
    cfg.steps = 1000;
    cfg.particles = 2000;
    cfg.seed = 1;
    cfg.threads = threads;
    const auto proj = simulate_reflected_projection(builtin::brownian_coefficients(), half.domain(), cfg);
    {
        const auto r = vi_residual(proj, half, constant_path(1.0));
        out.push_back(at_most(suite, "projection_residual", r.max_residual, r.tolerance));
    }
    {
        cfg.penalization = 1e3;
        const auto box = ConvexPotential::indicator_interval(-1.0, 1.0);
        const auto split = simulate_mvsvi_penalized(builtin::brownian_coefficients(), box, cfg);
        double worst = -kInf, tol = 0.0;
        for (double c : {-0.5, 0.0, 0.5}) {
            const auto r = vi_residual(split, box, constant_path(c));
            worst = std::max(worst, r.max_residual - r.tolerance);
            tol = r.tolerance;
        }
        out.push_back(at_most(suite, "splitting_residual", worst + tol, tol));
    }
    {
        SolverConfig fcfg;
        fcfg.steps = 50;
        fcfg.particles = 2000;
        fcfg.seed = 1;
        fcfg.threads = threads;
        const auto fwd = simulate_mvsde(builtin::brownian_coefficients(), fcfg);
        BackwardConfig bcfg;
        bcfg.penalization = 1e3;
        bcfg.threads = threads;
        const auto bwd = solve_penalized_bsde(fwd, builtin::constrained_backward(), half, bcfg);
        double worst = -kInf, tol = 0.0;
        for (double c : {0.5, 1.0}) {
            const auto r = vi_residual(bwd, half, constant_path(c));
            worst = std::max(worst, r.max_residual - r.tolerance);
            tol = r.tolerance;
        }
        out.push_back(at_most(suite, "backward_splitting_residual", worst + tol, tol));
    }
    {
        SolverConfig a = cfg, b = cfg;
        a.initial = ConstantInitial{0.0};
        b.initial = ConstantInitial{0.5};
        const auto pa = simulate_reflected_projection(builtin::brownian_coefficients(), half.domain(), a);
        const auto pb = simulate_reflected_projection(builtin::brownian_coefficients(), half.domain(), b);
        const auto c = monotone_coupling(pa, pb);
        out.push_back(at_least(suite, "monotone_coupling", *std::min_element(c.begin(), c.end()), -1e-9));
    }
    {
        SolverConfig z = cfg;
        z.steps = 20;
        const auto s = simulate_mvsde(builtin::brownian_coefficients(), z);
        const auto r = vi_residual(s, ConvexPotential::zero(), constant_path(0.3));
        double worst = 0.0;
        for (double v : r.residuals) worst = std::max(worst, std::abs(v));
        out.push_back(at_most(suite, "zero_potential_zero_residual", worst, 0.0));
    }
    {
        bool raised = false;
        try {
            vi_residual(proj, ConvexPotential::indicator_interval(0.0, 1.0), constant_path(2.0));
        } catch (const Error& e) {
            raised = e.code() == ErrorCode::TestPathOutsideDomain;
        }
        out.push_back(flag(suite, "outside_test_path_rejected", raised));
    }
    return out;
}

std::vector<PropertyCheck> run_suite(const std::string& name, unsigned threads) {
    if (name == "all") {
        std::vector<PropertyCheck> all;
        for (const auto& n : suite_names()) {
            auto part = run_suite(n, threads);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    if (name == "convex") return convex_suite();
    if (name == "yw") return yw_suite();
    if (name == "wasserstein") return wasserstein_suite();
    if (name == "moments") return moments_suite(threads);
    if (name == "penalization") return penalization_suite(threads);
    if (name == "vi") return vi_suite(threads);
    throw Error(ErrorCode::UnknownSuite, "unknown property suite '" + name + "'");
}

}  // namespace mvsim
