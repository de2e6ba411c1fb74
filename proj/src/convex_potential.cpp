#include "mvsim/convex_potential.hpp"

#include "mvsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvsim {

namespace {

constexpr int kProxBudget = 200;
constexpr double kProxTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double max_affine_value(const std::vector<AffinePiece>& pieces, double x) {
    double v = -kInf;
    for (const auto& p : pieces) v = std::max(v, p.slope * x + p.intercept);
    return v;
}

// Breakpoints of the upper envelope of a set of lines.
std::vector<double> envelope_kinks(std::vector<AffinePiece> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](const AffinePiece& a, const AffinePiece& b) {
        return a.slope < b.slope || (a.slope == b.slope && a.intercept < b.intercept);
    });
    // Drop parallel duplicates, keeping the highest intercept.
    std::vector<AffinePiece> lines;
    for (const auto& p : pieces) {
        if (!lines.empty() && lines.back().slope == p.slope) lines.back() = p;
        else lines.push_back(p);
    }
    std::vector<AffinePiece> hull;
    auto cross = [](const AffinePiece& a, const AffinePiece& b) {
        return (a.intercept - b.intercept) / (b.slope - a.slope);
    };
    for (const auto& l : lines) {
        while (hull.size() >= 2 &&
               cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back())) {
            hull.pop_back();
        }
        hull.push_back(l);
    }
    std::vector<double> kinks;
    for (std::size_t i = 1; i < hull.size(); ++i) kinks.push_back(cross(hull[i - 1], hull[i]));
    return kinks;
}

// Nonnegative root u of level*(u - a) + scale*p*u^(p-1) = 0 on [0, a], a >= 0.
double abs_power_radial_prox(double a, double p, double scale, double level) {
    if (a == 0.0 || scale == 0.0) return a;
    if (p == 1.0) return std::max(0.0, a - scale / level);
    if (p == 2.0) return a * level / (level + 2.0 * scale);
    auto g = [&](double u) { return level * (u - a) + scale * p * std::pow(u, p - 1.0); };
    double lo = 0.0, hi = a;
    double u = a * 0.5;
    for (int it = 0; it < kProxBudget; ++it) {
        const double gu = g(u);
        if (gu > 0.0) hi = u;
        else lo = u;
        const double dg = level + scale * p * (p - 1.0) * std::pow(u, p - 2.0);
        double next = u - gu / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - u) <= 1e-16 * std::max(1.0, a) || hi - lo <= 1e-16 * std::max(1.0, a)) {
            return next;
        }
        u = next;
    }
    return u;
}

// 1-D strictly convex minimization of level/2 (u-x)^2 + f(u) over [lo, hi]:
// golden section to a coarse bracket, then bisection on the sign of a
// symmetric difference of the objective.
double numeric_prox(const std::function<double(double)>& f, const Interval& domain, double x,
                    double level) {
    double lo = std::max(std::min(0.0, x), domain.lo);
    double hi = std::min(std::max(0.0, x), domain.hi);
    if (!(lo <= hi)) return domain.clamp(x);
    if (lo == hi) return lo;
    auto h = [&](double u) {
        const double d = u - x;
        return 0.5 * level * d * d + f(u);
    };
    const double scale = 1.0 + std::abs(x);
    int iterations = 0;

    constexpr double kGolden = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double hc = h(c), hd = h(d);
    while (b - a > 1e-6 * scale) {
        if (++iterations > kProxBudget) {
            throw Error(ErrorCode::NumericNonconvergence,
                        "golden-section prox did not bracket the minimizer near x=" + std::to_string(x));
        }
        if (hc <= hd) {
            b = d;
            d = c;
            hd = hc;
            c = b - kGolden * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + kGolden * (b - a);
            hd = h(d);
        }
    }
    // The minimizer lies in [a, b] up to the golden-section bracket slack; widen once.
    a = std::max(lo, a - 1e-6 * scale);
    b = std::min(hi, b + 1e-6 * scale);
    while (b - a > kProxTol * scale) {
        if (++iterations > kProxBudget) {
            throw Error(ErrorCode::NumericNonconvergence,
                        "prox bisection exhausted its budget near x=" + std::to_string(x));
        }
        const double m = 0.5 * (a + b);
        const double tau = 1e-6 * (1.0 + std::abs(m));
        const double slope = h(std::min(m + tau, hi)) - h(std::max(m - tau, lo));
        if (slope > 0.0) b = m;
        else if (slope < 0.0) a = m;
        else break;
    }
    double best = 0.5 * (a + b);
    double best_h = h(best);
    for (double cand : {lo, hi}) {
        const double hv = h(cand);
        if (hv < best_h) {
            best = cand;
            best_h = hv;
        }
    }
    return best;
}

void require_level(double level) {
    if (!(level > 0.0) || !std::isfinite(level)) {
        throw Error(ErrorCode::InvalidArgument, "penalization level must be positive and finite");
    }
}

}  // namespace

ConvexPotential ConvexPotential::indicator_interval(double lo, double hi) {
    if (!(lo <= 0.0 && hi >= 0.0 && lo < hi)) {
        throw Error(ErrorCode::InvalidArgument, "indicator_interval requires lo <= 0 <= hi and lo < hi");
    }
    return ConvexPotential(IndicatorInterval{lo, hi}, Interval{lo, hi});
}

ConvexPotential ConvexPotential::abs_power(double exponent, double scale) {
    if (!(exponent >= 1.0) || !std::isfinite(exponent)) {
        throw Error(ErrorCode::InvalidArgument, "abs_power requires exponent >= 1");
    }
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw Error(ErrorCode::InvalidArgument, "abs_power requires scale >= 0");
    }
    return ConvexPotential(AbsPower{exponent, scale}, Interval{});
}

ConvexPotential ConvexPotential::max_affine(std::vector<AffinePiece> pieces) {
    if (pieces.empty()) throw Error(ErrorCode::InvalidArgument, "max_affine requires at least one piece");
    for (const auto& p : pieces) {
        if (!std::isfinite(p.slope) || !std::isfinite(p.intercept)) {
            throw Error(ErrorCode::InvalidArgument, "max_affine pieces must be finite");
        }
    }
    if (max_affine_value(pieces, 0.0) != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "max_affine must satisfy psi(0) = 0");
    }
    double smin = kInf, smax = -kInf;
    for (const auto& p : pieces) {
        if (p.intercept == 0.0) {
            smin = std::min(smin, p.slope);
            smax = std::max(smax, p.slope);
        }
    }
    if (!(smin <= 0.0 && smax >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "max_affine must attain its minimum 0 at the origin");
    }
    auto kinks = envelope_kinks(pieces);
    return ConvexPotential(MaxAffine{std::move(pieces), std::move(kinks)}, Interval{});
}

ConvexPotential ConvexPotential::custom(std::function<double(double)> eval, Interval domain,
                                        std::function<double(double, double)> prox) {
    if (!eval) throw Error(ErrorCode::InvalidArgument, "custom potential needs an eval callback");
    if (!(domain.lo <= 0.0 && domain.hi >= 0.0 && domain.lo < domain.hi)) {
        throw Error(ErrorCode::InvalidArgument, "custom potential domain must contain 0 and have lo < hi");
    }
    if (eval(0.0) != 0.0) throw Error(ErrorCode::InvalidArgument, "custom potential must satisfy psi(0) = 0");
    return ConvexPotential(CustomPotential{std::move(eval), std::move(prox), domain}, domain);
}

bool ConvexPotential::uses_numeric_prox() const noexcept {
    const auto* c = std::get_if<CustomPotential>(&kind_);
    return c != nullptr && !c->prox;
}

bool ConvexPotential::is_identically_zero() const noexcept {
    if (const auto* a = std::get_if<AbsPower>(&kind_)) return a->scale == 0.0;
    if (const auto* i = std::get_if<IndicatorInterval>(&kind_)) return i->lo == -kInf && i->hi == kInf;
    if (const auto* m = std::get_if<MaxAffine>(&kind_)) {
        return std::all_of(m->pieces.begin(), m->pieces.end(),
                           [](const AffinePiece& p) { return p.slope == 0.0; });
    }
    return false;
}

double ConvexPotential::eval(double x) const {
    if (!domain_.contains(x)) return kInf;
    return std::visit(Overloaded{
                          [](const IndicatorInterval&) { return 0.0; },
                          [x](const AbsPower& a) {
                              if (a.scale == 0.0) return 0.0;
                              return a.scale * (a.exponent == 1.0 ? std::abs(x) : std::pow(std::abs(x), a.exponent));
                          },
                          [x](const MaxAffine& m) { return max_affine_value(m.pieces, x); },
                          [x](const CustomPotential& c) { return c.eval(x); },
                      },
                      kind_);
}

double ConvexPotential::prox(double x, double level) const {
    require_level(level);
    return std::visit(
        Overloaded{
            [x](const IndicatorInterval& i) { return std::clamp(x, i.lo, i.hi); },
            [x, level](const AbsPower& a) {
                const double r = abs_power_radial_prox(std::abs(x), a.exponent, a.scale, level);
                return x < 0.0 ? -r : r;
            },
            [x, level](const MaxAffine& m) {
                auto h = [&](double u) {
                    const double d = u - x;
                    return 0.5 * level * d * d + max_affine_value(m.pieces, u);
                };
                double best = x;
                double best_h = kInf;
                auto consider = [&](double u) {
                    const double hv = h(u);
                    if (hv < best_h) {
                        best_h = hv;
                        best = u;
                    }
                };
                for (const auto& p : m.pieces) consider(x - p.slope / level);
                for (double k : m.kinks) consider(k);
                return best;
            },
            [this, x, level](const CustomPotential& c) {
                if (c.prox) return domain_.clamp(c.prox(x, level));
                return numeric_prox(c.eval, c.domain, x, level);
            },
        },
        kind_);
}

double ConvexPotential::moreau(double x, double level) const {
    const double u = prox(x, level);
    const double d = x - u;
    return 0.5 * level * d * d + eval(u);
}

double ConvexPotential::yosida_grad(double x, double level) const {
    return level * (x - prox(x, level));
}

std::optional<Interval> ConvexPotential::subdifferential(double x) const {
    if (!domain_.contains(x)) return std::nullopt;
    return std::visit(
        Overloaded{
            [x](const IndicatorInterval& i) {
                Interval z{0.0, 0.0};
                if (x == i.lo) z.lo = -kInf;
                if (x == i.hi) z.hi = kInf;
                return z;
            },
            [x](const AbsPower& a) {
                if (a.exponent == 1.0) {
                    if (x == 0.0) return Interval{-a.scale, a.scale};
                    const double s = x > 0.0 ? a.scale : -a.scale;
                    return Interval{s, s};
                }
                const double g = a.scale * a.exponent * std::pow(std::abs(x), a.exponent - 1.0);
                const double s = x < 0.0 ? -g : g;
                return Interval{s, s};
            },
            [x](const MaxAffine& m) {
                const double v = max_affine_value(m.pieces, x);
                const double tol = 1e-12 * (1.0 + std::abs(v));
                Interval z{kInf, -kInf};
                for (const auto& p : m.pieces) {
                    if (p.slope * x + p.intercept >= v - tol) {
                        z.lo = std::min(z.lo, p.slope);
                        z.hi = std::max(z.hi, p.slope);
                    }
                }
                return z;
            },
            [this, x](const CustomPotential& c) {
                const double h = 1e-7 * (1.0 + std::abs(x));
                const double fx = c.eval(x);
                Interval z{-kInf, kInf};
                if (x - h >= domain_.lo) z.lo = (fx - c.eval(x - h)) / h;
                if (x + h <= domain_.hi) z.hi = (c.eval(x + h) - fx) / h;
                return z;
            },
        },
        kind_);
}

YosidaView::YosidaView(const ConvexPotential& potential, double level)
    : potential_(&potential), level_(level) {
    require_level(level);
}

double implicit_penalization_solve(const ConvexPotential& psi, double level, double delta, double w) {
    require_level(level);
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
    if (psi.is_identically_zero()) return w;
    if (const auto* ind = std::get_if<IndicatorInterval>(&psi.kind())) {
        const double c = 1.0 + delta * level;
        if (w > ind->hi) return ind->hi + (w - ind->hi) / c;
        if (w < ind->lo) return ind->lo + (w - ind->lo) / c;
        return w;
    }
    const double dn = delta * level;
    const double j = psi.prox(w, level / (1.0 + dn));
    if (j == w) return w;
    return w + (dn / (1.0 + dn)) * (j - w);
}

}  // namespace mvsim
