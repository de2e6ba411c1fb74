#include "mvsim/diagnostics.hpp"

#include "mvsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvsim {

Estimate mean_estimate(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptySample, "estimate over an empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

// ---------------------------------------------------------------------------

YamadaWatanabeFn::YamadaWatanabeFn(double epsilon, double delta, double taper)
    : eps_(epsilon), delta_(delta), log_delta_(std::log(delta)) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::ConstructionError, "epsilon must lie in (0, 1)");
    if (!(delta > 1.0) || !std::isfinite(delta)) throw Error(ErrorCode::ConstructionError, "delta must exceed 1");
    if (!(taper > 0.0 && taper < 0.4)) throw Error(ErrorCode::ConstructionError, "taper must lie in (0, 0.4)");

    const double a = epsilon / delta;
    const double b = epsilon;
    const double ramp = taper * (b - a);
    s_ = {a, a + ramp, b - ramp, b};

    // int_a^b tau(x) / x dx for the unit trapezoid tau.
    const double unit = std::log(s_[2] / s_[1]) + (b / ramp) * std::log(b / s_[2]) - (a / ramp) * std::log(s_[1] / a);
    r_ = log_delta_ / unit;
    if (!(r_ <= 2.0)) {
        throw Error(ErrorCode::ConstructionError, "taper plateau " + std::to_string(r_) + " exceeds 2");
    }

    const double k = r_ / (ramp * log_delta_);
    alpha_ = {-a * k, r_ / log_delta_, b * k};
    beta_ = {k, 0.0, -k};

    d1_at_[0] = 0.0;
    v_at_[0] = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const double s = s_[j], e = s_[j + 1], h = e - s;
        d1_at_[j + 1] = d1_at_[j] + alpha_[j] * std::log(e / s) + beta_[j] * h;
        v_at_[j + 1] = v_at_[j] + d1_at_[j] * h + alpha_[j] * (e * std::log(e / s) - h) + beta_[j] * h * h / 2.0;
    }
    if (std::abs(d1_at_[3] - 1.0) > 1e-12) {
        throw Error(ErrorCode::ConstructionError, "taper normalization failed");
    }
}

double YamadaWatanabeFn::density(double x) const {
    if (!(x >= s_[0] && x <= s_[3])) return 0.0;
    const std::size_t j = x < s_[1] ? 0 : (x < s_[2] ? 1 : 2);
    return std::max(0.0, alpha_[j] / x + beta_[j]);
}

double YamadaWatanabeFn::d2(double x) const { return density(std::abs(x)); }

double YamadaWatanabeFn::d1(double x) const {
    const double y = std::abs(x);
    double v;
    if (y <= s_[0]) v = 0.0;
    else if (y >= s_[3]) v = 1.0;
    else {
        const std::size_t j = y < s_[1] ? 0 : (y < s_[2] ? 1 : 2);
        v = d1_at_[j] + alpha_[j] * std::log(y / s_[j]) + beta_[j] * (y - s_[j]);
        v = std::clamp(v, 0.0, 1.0);
    }
    return x < 0.0 ? -v : v;
}

double YamadaWatanabeFn::eval(double x) const {
    const double y = std::abs(x);
    if (y <= s_[0]) return 0.0;
    if (y >= s_[3]) return v_at_[3] + (y - s_[3]);
    const std::size_t j = y < s_[1] ? 0 : (y < s_[2] ? 1 : 2);
    const double s = s_[j], h = y - s;
    return v_at_[j] + d1_at_[j] * h + alpha_[j] * (y * std::log(y / s) - h) + beta_[j] * h * h / 2.0;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> cauchy_terms(const ForwardSolution& a, const ForwardSolution& b, double p) {
    if (p < 1.0) throw Error(ErrorCode::InvalidOrder, "gap order must be >= 1");
    if (a.seed != b.seed) throw Error(ErrorCode::SeedMismatch, "refinement gap needs a common seed");
    if (a.particles != b.particles || a.horizon != b.horizon) {
        throw Error(ErrorCode::GridMismatch, "refinement gap needs equal horizons and particle counts");
    }
    if (b.steps % a.steps != 0) throw Error(ErrorCode::GridMismatch, "second grid must refine the first");
    if (a.noise_steps != b.noise_steps) {
        throw Error(ErrorCode::GridMismatch, "solutions do not share a common noise grid");
    }
    if (!a.has_paths || !b.has_paths) throw Error(ErrorCode::InvalidArgument, "refinement gap needs stored paths");
    const std::size_t factor = b.steps / a.steps;
    std::vector<double> terms(a.particles, 0.0);
    for (std::size_t k = 0; k <= a.steps; ++k) {
        for (std::size_t i = 0; i < a.particles; ++i) {
            terms[i] = std::max(terms[i], std::abs(a.x(i, k) - b.x(i, k * factor)));
        }
    }
    for (double& t : terms) t = std::pow(t, p);
    return terms;
}

}  // namespace

double cauchy_gap(const ForwardSolution& a, const ForwardSolution& b, double p) {
    return cauchy_gap_estimate(a, b, p).value;
}

Estimate cauchy_gap_estimate(const ForwardSolution& a, const ForwardSolution& b, double p) {
    const auto terms = cauchy_terms(a, b, p);
    const Estimate e = mean_estimate(terms);
    const double value = std::pow(e.value, 1.0 / p);
    const double se = e.value > 0.0 ? value / (p * e.value) * e.std_error : 0.0;
    return {value, se};
}

Estimate backward_sup_gap(const BackwardSolution& a, const BackwardSolution& b) {
    if (a.steps != b.steps || a.particles != b.particles) {
        throw Error(ErrorCode::GridMismatch, "backward gap needs a common grid");
    }
    std::vector<double> terms(a.particles, 0.0);
    for (std::size_t k = 0; k <= a.steps; ++k) {
        for (std::size_t i = 0; i < a.particles; ++i) {
            const double d = a.y(i, k) - b.y(i, k);
            terms[i] = std::max(terms[i], d * d);
        }
    }
    return mean_estimate(terms);
}

const MomentEntry* MomentReport::find(double p) const {
    for (const auto& e : entries) {
        if (e.p == p) return &e;
    }
    return nullptr;
}

namespace {

MomentReport build_moments(std::span<const double> sup_abs, std::span<const double> start,
                           std::span<const double> ps) {
    MomentReport rep;
    std::vector<double> buf(sup_abs.size());
    for (double p : ps) {
        if (!(p > 0.0)) throw Error(ErrorCode::InvalidOrder, "moment order must be positive");
        MomentEntry e;
        e.p = p;
        for (std::size_t i = 0; i < sup_abs.size(); ++i) buf[i] = std::pow(sup_abs[i], p);
        e.estimator = mean_estimate(buf);
        double ref = 0.0;
        for (double v : start) ref += std::pow(std::abs(v), p);
        e.reference = ref / static_cast<double>(start.size());
        e.ratio = e.estimator.value / (1.0 + e.reference);
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace

MomentReport moment_report(const ForwardSolution& s, std::span<const double> ps) {
    return build_moments(s.sup_abs, s.initial, ps);
}

MomentReport moment_report(const BackwardSolution& s, std::span<const double> ps) {
    std::vector<double> sup(s.particles, 0.0);
    for (std::size_t k = 0; k <= s.steps; ++k) {
        for (std::size_t i = 0; i < s.particles; ++i) sup[i] = std::max(sup[i], std::abs(s.y(i, k)));
    }
    return build_moments(sup, s.y_slice(s.steps), ps);
}

Estimate phi_variation_moment(const ForwardSolution& s) {
    std::vector<double> sq(s.phi_variation.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = s.phi_variation[i] * s.phi_variation[i];
    return mean_estimate(sq);
}

BackwardEnergy backward_energy(const BackwardSolution& s) {
    BackwardEnergy e;
    std::vector<double> sup(s.particles, 0.0);
    for (std::size_t k = 0; k <= s.steps; ++k) {
        for (std::size_t i = 0; i < s.particles; ++i) sup[i] = std::max(sup[i], s.y(i, k) * s.y(i, k));
    }
    e.sup_y2 = mean_estimate(sup);
    const double dt = s.dt();
    const double n = static_cast<double>(s.particles);
    double z2 = 0.0, g2 = 0.0;
    for (double z : s.Z) z2 += z * z;
    // Each increment equals dt * grad psi2^n(Y_k) by construction of the implicit step.
    for (double d : s.phi2) g2 += (d / dt) * (d / dt);
    e.z_energy = dt * z2 / n;
    e.grad_energy = dt * g2 / n;
    return e;
}

// ---------------------------------------------------------------------------

LogLogFit rate_fit(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 3) throw Error(ErrorCode::InsufficientSweep, "a rate fit needs at least 3 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [res, gap] : pairs) {
        if (!(res > 0.0) || !(gap > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate fit needs positive entries");
        sx += std::log(res);
        sy += std::log(gap);
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [res, gap] : pairs) {
        const double dx = std::log(res) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(gap) - my);
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientSweep, "rate fit needs distinct resolutions");
    LogLogFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

GrowthReport penalization_growth(std::span<const std::pair<double, const ForwardSolution*>> sweep) {
    if (sweep.size() < 3) throw Error(ErrorCode::InsufficientSweep, "penalization sweep needs at least 3 levels");
    GrowthReport rep;
    std::size_t zeros = 0;
    for (const auto& [level, sol] : sweep) {
        std::vector<double> g4(sol->sup_grad.size());
        for (std::size_t i = 0; i < g4.size(); ++i) g4[i] = std::pow(sol->sup_grad[i], 4);
        rep.levels.push_back(level);
        rep.values.push_back(mean_estimate(g4));
        if (rep.values.back().value == 0.0) ++zeros;
    }
    if (zeros == sweep.size()) {
        rep.degenerate_zero = true;
        return rep;
    }
    if (zeros > 0) throw Error(ErrorCode::InvalidArgument, "penalization sweep mixes zero and positive values");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < rep.levels.size(); ++j) pts.emplace_back(rep.levels[j], rep.values[j].value);
    rep.fit = rate_fit(pts);
    rep.pass = rep.fit.slope <= rep.bound;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

void check_path(const TestPath& rho, const std::vector<double>& times, const Interval& domain) {
    for (double t : times) {
        const double v = rho(t);
        if (!domain.contains(v)) {
            throw Error(ErrorCode::TestPathOutsideDomain,
                        "test path value " + std::to_string(v) + " at t=" + std::to_string(t) + " is outside the domain");
        }
    }
}

ViReport finish(std::vector<double> residuals, double scale, double rel_tolerance) {
    ViReport rep;
    rep.residuals = std::move(residuals);
    rep.max_residual = -kInf;
    for (double r : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
    rep.tolerance = rel_tolerance * (1.0 + scale);
    rep.pass = rep.max_residual <= rep.tolerance;
    return rep;
}

}  // namespace

ViReport vi_residual(const ForwardSolution& s, const ConvexPotential& psi, const TestPath& rho,
                     double rel_tolerance) {
    if (!s.has_paths) throw Error(ErrorCode::InvalidArgument, "variational residual needs stored paths");
    check_path(rho, s.times, psi.domain());
    const std::size_t n = s.particles, m = s.steps;
    const double dt = s.dt();
    const std::size_t shift = s.anchor == IncrementAnchor::right ? 1 : 0;
    const double level = s.penalization;
    std::vector<double> res(n, 0.0);
    double scale = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double t = s.times[k + shift];
        const double r = rho(t);
        const double psi_r = psi.eval(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = s.x(i, k + shift);
            const double energy = level > 0.0 ? psi.moreau(a, level) : psi.eval(a);
            res[i] += (r - a) * s.dphi(i, k) + (energy - psi_r) * dt;
            scale = std::max(scale, std::abs(a));
        }
    }
    return finish(std::move(res), scale, rel_tolerance);
}

ViReport vi_residual(const BackwardSolution& s, const ConvexPotential& psi2, const TestPath& rho,
                     double rel_tolerance) {
    check_path(rho, s.times, psi2.domain());
    const std::size_t n = s.particles, m = s.steps;
    const double dt = s.dt();
    std::vector<double> res(n, 0.0);
    double scale = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = rho(s.times[k]);
        const double psi_r = psi2.eval(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = s.y(i, k);
            res[i] += (r - a) * s.dphi2(i, k) + (psi2.moreau(a, s.penalization) - psi_r) * dt;
            scale = std::max(scale, std::abs(a));
        }
    }
    return finish(std::move(res), scale, rel_tolerance);
}

std::vector<double> monotone_coupling(const ForwardSolution& a, const ForwardSolution& b) {
    if (a.steps != b.steps || a.particles != b.particles || a.anchor != b.anchor) {
        throw Error(ErrorCode::GridMismatch, "monotone coupling needs a common grid");
    }
    if (!a.has_paths || !b.has_paths) throw Error(ErrorCode::InvalidArgument, "monotone coupling needs stored paths");
    const std::size_t shift = a.anchor == IncrementAnchor::right ? 1 : 0;
    std::vector<double> out(a.particles, 0.0);
    for (std::size_t k = 0; k < a.steps; ++k) {
        for (std::size_t i = 0; i < a.particles; ++i) {
            out[i] += (a.x(i, k + shift) - b.x(i, k + shift)) * (a.dphi(i, k) - b.dphi(i, k));
        }
    }
    return out;
}

}  // namespace mvsim
