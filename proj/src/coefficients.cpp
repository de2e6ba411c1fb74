#include "mvsim/coefficients.hpp"

#include "mvsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mvsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double finite_or_throw(double v, const char* what) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteCoefficient, std::string(what) + " evaluated to a non-finite value");
    return v;
}

MeasureStats stats_of(const EmpiricalMeasure& mu) { return MeasureStats::of(mu.samples()); }

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Small fixed family of test laws used by the falsifier.
std::vector<EmpiricalMeasure> test_measures(const GridSpec& grid) {
    const double r = std::max(std::abs(grid.x_min), std::abs(grid.x_max));
    std::vector<std::vector<double>> raw = {
        {0.0}, {-1.0, 1.0}, {2.0}, {-0.25 * r, 0.25 * r}, {-3.0, 0.0, 5.0}, {0.5 * r},
    };
    std::vector<EmpiricalMeasure> out;
    out.reserve(raw.size());
    for (const auto& v : raw) out.push_back(EmpiricalMeasure::from_samples(v));
    return out;
}

std::vector<double> grid_points(const GridSpec& grid) {
    if (grid.points < 2 || !(grid.x_max > grid.x_min)) {
        throw Error(ErrorCode::InvalidArgument, "grid spec needs >= 2 points and x_max > x_min");
    }
    std::vector<double> xs(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) {
        xs[i] = grid.x_min + (grid.x_max - grid.x_min) * static_cast<double>(i) / static_cast<double>(grid.points - 1);
    }
    return xs;
}

// Ratio lhs / rhs with 0/0 treated as satisfied.
double ratio(double lhs, double rhs) {
    if (lhs == 0.0) return 0.0;
    if (rhs <= 0.0) return std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

void record(ConditionCheck& c, double r, double x, double xo) {
    if (r > c.worst_ratio || std::isnan(r)) {
        c.worst_ratio = r;
        c.worst_x = x;
        c.worst_x_other = xo;
    }
}

void finalize(ConditionCheck& c) { c.pass = !(c.worst_ratio > 1.0 + 1e-9) && !std::isnan(c.worst_ratio); }

}  // namespace

// ---------------------------------------------------------------------------

double eval_drift(const ForwardCoefficients& fc, double t, double x, const MeasureStats& mu) {
    const double v = std::visit(Overloaded{
                                    [&](const MeanFieldLinearDrift& d) { return d.a * x + d.b_bar * mu.mean; },
                                    [](const ConstantDrift& d) { return d.value; },
                                    [&](const CustomDrift& d) { return d.fn(t, x, mu); },
                                },
                                fc.drift);
    return finite_or_throw(v, "drift");
}

double eval_drift(const ForwardCoefficients& fc, double t, double x, const EmpiricalMeasure& mu) {
    return eval_drift(fc, t, x, stats_of(mu));
}

double eval_diffusion(const ForwardCoefficients& fc, double t, double x) {
    const double v = std::visit(Overloaded{
                                    [&](const PowerDiffusion& d) {
                                        if (d.c == 0.0) return 0.0;
                                        return d.c * std::pow(d.smoothing + std::abs(x), d.theta);
                                    },
                                    [](const ConstantDiffusion& d) { return d.value; },
                                    [&](const CustomDiffusion& d) { return d.fn(t, x); },
                                },
                                fc.diffusion);
    return finite_or_throw(v, "diffusion");
}

std::optional<double> holder_index(const ForwardCoefficients& fc) {
    if (std::holds_alternative<ConstantDiffusion>(fc.diffusion)) return 0.5;
    if (const auto* p = std::get_if<PowerDiffusion>(&fc.diffusion)) {
        if (p->theta > 0.5 && p->theta <= 1.0) return p->theta - 0.5;
    }
    return std::nullopt;
}

bool claims_forward_assumptions(const ForwardCoefficients& fc) {
    if (std::holds_alternative<CustomDrift>(fc.drift)) return false;
    return holder_index(fc).has_value();
}

// ---------------------------------------------------------------------------

void validate_exponents(const BackwardCoefficients& bc) {
    if (!(bc.l > 1.0)) throw Error(ErrorCode::InvalidArgument, "driver exponent l must exceed 1");
    if (!(bc.k > 0.0 && bc.k < 1.0)) throw Error(ErrorCode::InvalidArgument, "driver exponent k must lie in (0, 1)");
}

double eval_driver(const BackwardCoefficients& bc, double t, double x, double y, double z,
                   const MeasureStats& mu, const MeasureStats& nu) {
    const double v = std::visit(
        Overloaded{
            [](const ZeroDriver&) { return 0.0; },
            [&](const LinearDriver& d) {
                return d.y_coef * y + d.z_coef * z + d.x_coef * x + d.mean_y_coef * nu.mean + d.constant;
            },
            [&](const CappedPowerDriver& d) { return d.coef * sgn(y) * std::pow(std::abs(y), d.k); },
            [&](const SaturatingDriver& d) {
                return d.y_coef * std::tanh(y) + d.z_coef * std::tanh(z) + d.x_coef * x + d.constant;
            },
            [&](const CustomDriver& d) { return d.fn(t, x, y, z, mu, nu); },
        },
        bc.driver);
    return finite_or_throw(v, "driver");
}

double eval_driver(const BackwardCoefficients& bc, double t, double x, double y, double z,
                   const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    return eval_driver(bc, t, x, y, z, stats_of(mu), stats_of(nu));
}

double eval_terminal(const BackwardCoefficients& bc, double x, const MeasureStats& mu) {
    const double v = std::visit(Overloaded{
                                    [&](const IdentityTerminal&) { return x; },
                                    [&](const SquareTerminal&) { return x * x; },
                                    [&](const LinearTerminal& g) { return g.x_coef * x + g.mean_coef * mu.mean + g.constant; },
                                    [&](const CustomTerminal& g) { return g.fn(x, mu); },
                                },
                                bc.terminal);
    return finite_or_throw(v, "terminal");
}

double eval_terminal(const BackwardCoefficients& bc, double x, const EmpiricalMeasure& mu) {
    return eval_terminal(bc, x, stats_of(mu));
}

bool driver_depends_on_y(const BackwardCoefficients& bc) {
    return std::visit(Overloaded{
                          [](const ZeroDriver&) { return false; },
                          [](const LinearDriver& d) { return d.y_coef != 0.0 || d.mean_y_coef != 0.0; },
                          [](const CappedPowerDriver& d) { return d.coef != 0.0; },
                          [](const SaturatingDriver& d) { return d.y_coef != 0.0; },
                          [](const CustomDriver&) { return true; },
                      },
                      bc.driver);
}

bool claims_backward_assumptions(const BackwardCoefficients& bc) {
    const bool driver_ok = std::visit(Overloaded{
                                          [](const ZeroDriver&) { return true; },
                                          [](const LinearDriver& d) {
                                              return d.y_coef == 0.0 && d.z_coef == 0.0 && d.mean_y_coef == 0.0;
                                          },
                                          [](const CappedPowerDriver&) { return false; },
                                          [](const SaturatingDriver&) { return true; },
                                          [](const CustomDriver&) { return false; },
                                      },
                                      bc.driver);
    const bool terminal_ok = std::holds_alternative<IdentityTerminal>(bc.terminal) ||
                             std::holds_alternative<LinearTerminal>(bc.terminal);
    return driver_ok && terminal_ok;
}

// ---------------------------------------------------------------------------

double AssumptionProfile::lipschitz_at(double R) const {
    if (backward_lipschitz) return backward_lipschitz(R);
    const double v = growth * (1.0 + R);
    return v > 1.0 ? std::sqrt(std::log(v)) : 0.0;
}

void AssumptionProfile::validate() const {
    if (!(growth > 0.0) || !(log_modulus > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "assumption constants must be positive");
    }
    if (!(alpha > 0.0 && alpha <= 0.5)) throw Error(ErrorCode::InvalidArgument, "Hoelder index must lie in (0, 1/2]");
    if (!(truncation_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncation radius must be positive");
}

bool ValidationReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.pass; });
}

const ConditionCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

ValidationReport validate_assumptions(const ForwardCoefficients& fc, const AssumptionProfile& profile,
                                      const GridSpec& grid) {
    profile.validate();
    const auto xs = grid_points(grid);
    const auto measures = test_measures(grid);
    std::vector<MeasureStats> stats;
    for (const auto& m : measures) stats.push_back(MeasureStats::of(m.samples()));

    ConditionCheck drift_growth{"drift_growth"}, diffusion_growth{"diffusion_growth"};
    ConditionCheck drift_modulus{"drift_modulus"}, diffusion_holder{"diffusion_holder"};
    const double C = profile.growth;
    const double L = profile.log_modulus;
    const double holder_exp = 2.0 * profile.alpha + 1.0;

    for (double t : grid.times) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            const auto& mu = stats[i % stats.size()];
            const double b = eval_drift(fc, t, x, mu);
            const double s = eval_diffusion(fc, t, x);
            record(drift_growth, ratio(std::abs(b), C * (1.0 + std::abs(x) + mu.abs_moment1)), x, x);
            record(diffusion_growth, ratio(std::abs(s), C * (1.0 + std::abs(x))), x, x);
            for (std::size_t j = 0; j < xs.size(); ++j) {
                const double xo = xs[j];
                const std::size_t mj = j % stats.size();
                const auto& nu = stats[mj];
                const double bo = eval_drift(fc, t, xo, nu);
                const double so = eval_diffusion(fc, t, xo);
                const double log_term = std::log(std::numbers::e + std::abs(x) + std::abs(xo));
                const double w1 = wasserstein(1.0, measures[i % stats.size()], measures[mj]);
                record(drift_modulus,
                       ratio(std::abs(b - bo), (L * log_term + mu.abs_moment1 + nu.abs_moment1) * (std::abs(x - xo) + w1)),
                       x, xo);
                const double ds = s - so;
                record(diffusion_holder, ratio(ds * ds, L * log_term * std::pow(std::abs(x - xo), holder_exp)), x, xo);
            }
        }
    }
    ValidationReport report;
    for (auto* c : {&drift_growth, &diffusion_growth, &drift_modulus, &diffusion_holder}) {
        finalize(*c);
        report.checks.push_back(*c);
    }
    return report;
}

ValidationReport validate_assumptions(const BackwardCoefficients& bc, const AssumptionProfile& profile,
                                      const GridSpec& grid) {
    profile.validate();
    validate_exponents(bc);
    const auto xs = grid_points(grid);
    const auto measures = test_measures(grid);
    std::vector<MeasureStats> stats;
    for (const auto& m : measures) stats.push_back(MeasureStats::of(m.samples()));
    const std::size_t nm = stats.size();
    const std::size_t np = xs.size();

    ConditionCheck driver_growth{"driver_growth"}, driver_lipschitz{"driver_local_lipschitz"};
    ConditionCheck terminal_growth{"terminal_growth"}, terminal_lipschitz{"terminal_lipschitz"};
    ConditionCheck lipschitz_table{"lipschitz_table"};
    const double C = profile.growth;

    for (double x : xs) {
        const double R = std::abs(x);
        const double LR = profile.lipschitz_at(R);
        record(lipschitz_table, ratio(std::exp(LR * LR), C * (1.0 + R)), x, x);
    }

    for (double t : grid.times) {
        for (std::size_t i = 0; i < np; ++i) {
            for (std::size_t j = 0; j < np; ++j) {
                const double y = xs[i];
                const double z = xs[j];
                const double x = xs[(i + j) % np];
                const auto& mu = stats[i % nm];
                const auto& nu = stats[j % nm];
                const double mu_l = std::pow(measures[i % nm].moment(bc.l), 1.0 / bc.l);
                const double f = eval_driver(bc, t, x, y, z, mu, nu);
                const double bound = C * (1.0 + std::pow(std::abs(x), bc.l) + std::pow(std::abs(y), bc.k) +
                                          std::pow(std::abs(z), bc.k) + mu_l + std::sqrt(nu.abs_moment2));
                record(driver_growth, ratio(std::abs(f), bound), y, z);

                // Second argument set: shifted (y, z) and a different law for Y.
                const double y2 = xs[(i + 7) % np];
                const double z2 = xs[(j + 13) % np];
                const std::size_t n2 = (j + 1) % nm;
                const double f2 = eval_driver(bc, t, x, y2, z2, mu, stats[n2]);
                const double w2 = wasserstein(2.0, measures[j % nm], measures[n2]);
                const double LR = profile.lipschitz_at(std::abs(x));
                record(driver_lipschitz,
                       ratio(std::abs(f - f2), (LR + mu_l) * (std::abs(y - y2) + std::abs(z - z2) + w2)), y, y2);
            }
        }
    }
    for (std::size_t i = 0; i < np; ++i) {
        const double x = xs[i];
        const auto& mu = stats[i % nm];
        const double g = eval_terminal(bc, x, mu);
        record(terminal_growth, ratio(std::abs(g), C * (1.0 + std::abs(x) + mu.abs_moment1)), x, x);
        for (std::size_t j = 0; j < np; ++j) {
            const double xo = xs[j];
            const auto& nu = stats[j % nm];
            const double go = eval_terminal(bc, xo, nu);
            const double w1 = wasserstein(1.0, measures[i % nm], measures[j % nm]);
            record(terminal_lipschitz, ratio(std::abs(g - go), C * (std::abs(x - xo) + w1)), x, xo);
        }
    }

    ValidationReport report;
    for (auto* c : {&driver_growth, &driver_lipschitz, &terminal_growth, &terminal_lipschitz, &lipschitz_table}) {
        finalize(*c);
        report.checks.push_back(*c);
    }
    return report;
}

}  // namespace mvsim
