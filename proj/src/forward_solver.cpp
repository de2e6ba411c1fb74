#include "mvsim/forward_solver.hpp"

#include "mvsim/error.hpp"
#include "mvsim/noise.hpp"
#include "mvsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvsim {

namespace {

constexpr double kBlowUp = 1e12;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

StepStats to_step_stats(const MeasureStats& s) { return {s.mean, s.abs_moment1, s.abs_moment2}; }

struct StepOut {
    double y;
    double dphi;
};

// Constraint policies. `explicit_drift` adds -grad(x) dt to the Euler step;
// otherwise `apply` maps the unconstrained Euler state w to (X_{k+1}, dphi).
struct FreeStep {
    static constexpr bool explicit_drift = false;
    static constexpr bool tracks_grad = false;
    double grad(double) const { return 0.0; }
    StepOut apply(double w) const { return {w, 0.0}; }
};

struct ProjectionStep {
    static constexpr bool explicit_drift = false;
    static constexpr bool tracks_grad = false;
    double lo, hi;
    double grad(double) const { return 0.0; }
    StepOut apply(double w) const {
        const double y = w < lo ? lo : (w > hi ? hi : w);
        return {y, w - y};
    }
};

struct IndicatorExplicit {
    static constexpr bool explicit_drift = true;
    static constexpr bool tracks_grad = true;
    double lo, hi, level;
    double grad(double x) const { return x > hi ? level * (x - hi) : (x < lo ? level * (x - lo) : 0.0); }
    StepOut apply(double w) const { return {w, 0.0}; }
};

struct IndicatorSplitting {
    static constexpr bool explicit_drift = false;
    static constexpr bool tracks_grad = true;
    double lo, hi, level, contraction;  // contraction = 1 / (1 + dt * level)
    double grad(double x) const { return x > hi ? level * (x - hi) : (x < lo ? level * (x - lo) : 0.0); }
    StepOut apply(double w) const {
        double y = w;
        if (w > hi) y = hi + (w - hi) * contraction;
        else if (w < lo) y = lo + (w - lo) * contraction;
        return {y, w - y};
    }
};

struct GeneralExplicit {
    static constexpr bool explicit_drift = true;
    static constexpr bool tracks_grad = true;
    const ConvexPotential* psi;
    double level;
    double grad(double x) const { return psi->yosida_grad(x, level); }
    StepOut apply(double w) const { return {w, 0.0}; }
};

struct GeneralSplitting {
    static constexpr bool explicit_drift = false;
    static constexpr bool tracks_grad = true;
    const ConvexPotential* psi;
    double level, dt;
    double grad(double x) const { return psi->yosida_grad(x, level); }
    StepOut apply(double w) const {
        const double y = implicit_penalization_solve(*psi, level, dt, w);
        return {y, w - y};
    }
};

auto make_drift(const MeanFieldLinearDrift& d) {
    return [a = d.a, c = d.b_bar](double, double x, const MeasureStats& mu) { return a * x + c * mu.mean; };
}
auto make_drift(const ConstantDrift& d) {
    return [v = d.value](double, double, const MeasureStats&) { return v; };
}
auto make_drift(const CustomDrift& d) {
    return [fn = &d.fn](double t, double x, const MeasureStats& mu) { return (*fn)(t, x, mu); };
}

auto make_diffusion(const PowerDiffusion& d) {
    return [c = d.c, theta = d.theta, s = d.smoothing](double, double x) {
        if (c == 0.0) return 0.0;
        const double base = s + std::abs(x);
        if (theta == 1.0) return c * base;
        if (theta == 0.5) return c * std::sqrt(base);
        return c * std::pow(base, theta);
    };
}
auto make_diffusion(const ConstantDiffusion& d) {
    return [v = d.value](double, double) { return v; };
}
auto make_diffusion(const CustomDiffusion& d) {
    return [fn = &d.fn](double t, double x) { return (*fn)(t, x); };
}

[[noreturn]] void blow_up(std::size_t step, std::size_t particle, double value) {
    throw Error(ErrorCode::NonFiniteState, "particle " + std::to_string(particle) + " reached " +
                                               std::to_string(value) + " at step " + std::to_string(step));
}

template <class DriftF, class DiffF, class Step>
void integrate(const DriftF& drift, const DiffF& diff, const Step& step, const SolverConfig& cfg,
               ForwardSolution& sol) {
    const std::size_t n = cfg.particles;
    const std::size_t m = cfg.steps;
    const double dt = cfg.dt();
    const std::size_t refine = cfg.crn_fine_steps == 0 ? 1 : cfg.crn_fine_steps / m;
    const double fine_sqrt = std::sqrt(cfg.horizon / static_cast<double>(m * refine));

    NoiseSource noise(cfg.seed);
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = noise.particle_key(i);

    std::vector<double> cur = sol.initial;
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(cur[i]) <= kBlowUp)) blow_up(0, i, cur[i]);
        sol.sup_abs[i] = std::abs(cur[i]);
        if constexpr (Step::tracks_grad) sol.sup_grad[i] = std::abs(step.grad(cur[i]));
    }
    if (sol.has_paths) std::copy(cur.begin(), cur.end(), sol.states.begin());
    sol.step_stats[0] = to_step_stats(MeasureStats::of(cur));

    for (std::size_t k = 0; k < m; ++k) {
        const double t = sol.times[k];
        const MeasureStats mu = MeasureStats::of(cur);
        parallel_chunks(n, cfg.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double x = cur[i];
                const double b = drift(t, x, mu);
                const double s = diff(t, x);
                double z = 0.0;
                for (std::size_t j = 0; j < refine; ++j) z += NoiseSource::normal(keys[i], k * refine + j);
                const double db = fine_sqrt * z;
                double w = x + b * dt + s * db;
                StepOut out;
                if constexpr (Step::explicit_drift) {
                    const double g = step.grad(x);
                    w = w - g * dt;
                    out = {w, g * dt};
                } else {
                    out = step.apply(w);
                }
                if (!(std::abs(out.y) <= kBlowUp)) blow_up(k + 1, i, out.y);
                next[i] = out.y;
                if (sol.has_paths) {
                    sol.states[(k + 1) * n + i] = out.y;
                    sol.increments[k * n + i] = out.dphi;
                    sol.brownian[k * n + i] = db;
                }
                sol.sup_abs[i] = std::max(sol.sup_abs[i], std::abs(out.y));
                sol.phi_total[i] += out.dphi;
                sol.phi_variation[i] += std::abs(out.dphi);
                if constexpr (Step::tracks_grad) sol.sup_grad[i] = std::max(sol.sup_grad[i], std::abs(step.grad(out.y)));
            }
        });
        cur.swap(next);
        sol.step_stats[k + 1] = to_step_stats(MeasureStats::of(cur));
    }
    sol.terminal = std::move(cur);
}

template <class Step>
void dispatch(const ForwardCoefficients& fc, const Step& step, const SolverConfig& cfg, ForwardSolution& sol) {
    std::visit(
        [&](const auto& drift_spec) {
            const auto drift = make_drift(drift_spec);
            std::visit([&](const auto& diff_spec) { integrate(drift, make_diffusion(diff_spec), step, cfg, sol); },
                       fc.diffusion);
        },
        fc.drift);
}

ForwardSolution prepare(const SolverConfig& cfg, Scheme scheme, const Interval& domain) {
    cfg.validate();
    ForwardSolution sol;
    sol.scheme = scheme;
    sol.anchor = (scheme == Scheme::penalized_splitting || scheme == Scheme::projection) ? IncrementAnchor::right
                                                                                         : IncrementAnchor::left;
    sol.horizon = cfg.horizon;
    sol.steps = cfg.steps;
    sol.particles = cfg.particles;
    sol.seed = cfg.seed;
    sol.noise_steps = cfg.crn_fine_steps == 0 ? cfg.steps : cfg.crn_fine_steps;
    sol.domain = domain;
    const std::size_t n = cfg.particles, m = cfg.steps;
    sol.times.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) sol.times[k] = cfg.horizon * static_cast<double>(k) / static_cast<double>(m);
    sol.has_paths = cfg.store_paths;
    if (cfg.store_paths) {
        sol.states.assign((m + 1) * n, 0.0);
        sol.increments.assign(m * n, 0.0);
        sol.brownian.assign(m * n, 0.0);
    }
    sol.initial.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.initial[i] = sample_initial(cfg.initial, cfg.seed, i);
        if (!domain.contains(sol.initial[i])) {
            throw Error(ErrorCode::InvalidArgument,
                        "initial sample " + std::to_string(sol.initial[i]) + " lies outside the constraint domain");
        }
    }
    sol.sup_abs.assign(n, 0.0);
    sol.sup_grad.assign(n, 0.0);
    sol.phi_total.assign(n, 0.0);
    sol.phi_variation.assign(n, 0.0);
    sol.step_stats.resize(m + 1);
    return sol;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    if (steps == 0) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
    if (particles == 0) throw Error(ErrorCode::InvalidArgument, "particles must be >= 1");
    if (!(penalization > 0.0) || !std::isfinite(penalization)) {
        throw Error(ErrorCode::InvalidArgument, "penalization level must be positive");
    }
    if (crn_fine_steps != 0 && crn_fine_steps % steps != 0) {
        throw Error(ErrorCode::GridMismatch, "crn_fine_steps must be a multiple of steps");
    }
    if (const auto* s = std::get_if<SampleInitial>(&initial); s != nullptr && s->values.empty()) {
        throw Error(ErrorCode::InvalidArgument, "explicit initial sample list is empty");
    }
    if (const auto* u = std::get_if<UniformInitial>(&initial); u != nullptr && !(u->b >= u->a)) {
        throw Error(ErrorCode::InvalidArgument, "uniform initial law needs a <= b");
    }
    if (const auto* g = std::get_if<GaussianInitial>(&initial); g != nullptr && !(g->stddev >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "gaussian initial law needs stddev >= 0");
    }
}

double sample_initial(const InitialLaw& law, std::uint64_t seed, std::size_t particle) {
    const NoiseSource noise(seed);
    return std::visit(Overloaded{
                          [](const ConstantInitial& c) { return c.value; },
                          [&](const UniformInitial& u) { return u.a + (u.b - u.a) * noise.initial_uniform(particle); },
                          [&](const GaussianInitial& g) { return g.mean + g.stddev * noise.initial_normal(particle); },
                          [&](const SampleInitial& s) { return s.values[particle % s.values.size()]; },
                      },
                      law);
}

std::span<const double> ForwardSolution::slice(std::size_t step) const {
    if (has_paths) return std::span<const double>(states).subspan(step * particles, particles);
    if (step == 0) return initial;
    if (step == steps) return terminal;
    throw Error(ErrorCode::InvalidArgument, "intermediate slices need store_paths");
}

EmpiricalMeasure ForwardSolution::measure_at(std::size_t step) const {
    return EmpiricalMeasure::from_samples(slice(step));
}

double ForwardSolution::terminal_violation() const {
    double s = 0.0;
    for (double v : terminal) s += domain.distance(v);
    return s / static_cast<double>(terminal.size());
}

ForwardSolution simulate_mvsde(const ForwardCoefficients& fc, const SolverConfig& cfg) {
    auto sol = prepare(cfg, Scheme::mvsde, Interval{});
    dispatch(fc, FreeStep{}, cfg, sol);
    return sol;
}

ForwardSolution simulate_mvsvi_penalized(const ForwardCoefficients& fc, const ConvexPotential& psi,
                                         const SolverConfig& cfg) {
    const bool expl = cfg.mode == PenaltyMode::explicit_euler;
    auto sol = prepare(cfg, expl ? Scheme::penalized_explicit : Scheme::penalized_splitting, psi.domain());
    const double n = cfg.penalization;
    const double dt = cfg.dt();
    sol.penalization = n;
    if (expl && n * dt > 1.0) {
        throw Error(ErrorCode::StiffnessViolation,
                    "explicit penalization needs n*dt <= 1, got " + std::to_string(n * dt));
    }
    if (const auto* ind = std::get_if<IndicatorInterval>(&psi.kind())) {
        if (expl) dispatch(fc, IndicatorExplicit{ind->lo, ind->hi, n}, cfg, sol);
        else dispatch(fc, IndicatorSplitting{ind->lo, ind->hi, n, 1.0 / (1.0 + dt * n)}, cfg, sol);
    } else {
        if (expl) dispatch(fc, GeneralExplicit{&psi, n}, cfg, sol);
        else dispatch(fc, GeneralSplitting{&psi, n, dt}, cfg, sol);
    }
    return sol;
}

ForwardSolution simulate_reflected_projection(const ForwardCoefficients& fc, const Interval& domain,
                                              const SolverConfig& cfg) {
    if (!(domain.lo < domain.hi)) throw Error(ErrorCode::InvalidArgument, "projection domain needs lo < hi");
    auto sol = prepare(cfg, Scheme::projection, domain);
    dispatch(fc, ProjectionStep{domain.lo, domain.hi}, cfg, sol);
    return sol;
}

}  // namespace mvsim
