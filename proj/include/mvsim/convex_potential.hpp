#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

namespace mvsim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi]; either end may be infinite.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
    double distance(double x) const noexcept {
        return x < lo ? lo - x : (x > hi ? x - hi : 0.0);
    }
    bool operator==(const Interval&) const = default;
};

struct IndicatorInterval {
    double lo;
    double hi;
};

/// psi(x) = scale * |x|^exponent
struct AbsPower {
    double exponent;
    double scale;
};

struct AffinePiece {
    double slope;
    double intercept;
};

/// psi(x) = max_j (slope_j * x + intercept_j)
struct MaxAffine {
    std::vector<AffinePiece> pieces;
    std::vector<double> kinks;  // breakpoints of the upper envelope, ascending
};

/// User-supplied potential. `eval` is only called on the domain. `prox`, when
/// present, must return argmin_u { level/2 |u - x|^2 + psi(u) }.
struct CustomPotential {
    std::function<double(double)> eval;
    std::function<double(double x, double level)> prox;
    Interval domain;
};

/// Proper lower-semicontinuous convex psi: R -> [0, +inf] with psi(0) = 0.
/// The origin may sit on the boundary of the domain, as for reflection at 0.
class ConvexPotential {
public:
    using Kind = std::variant<IndicatorInterval, AbsPower, MaxAffine, CustomPotential>;

    static ConvexPotential indicator_interval(double lo, double hi);
    static ConvexPotential abs_power(double exponent, double scale);
    static ConvexPotential max_affine(std::vector<AffinePiece> pieces);
    static ConvexPotential custom(std::function<double(double)> eval, Interval domain,
                                  std::function<double(double, double)> prox = {});
    /// psi == 0 on the whole line.
    static ConvexPotential zero() { return abs_power(1.0, 0.0); }

    /// psi(x); +inf off the domain.
    double eval(double x) const;

    /// Resolvent J_n x = argmin_u { n/2 |u - x|^2 + psi(u) }.
    double prox(double x, double level) const;

    /// Moreau envelope psi^n(x) = n/2 |x - J_n x|^2 + psi(J_n x).
    double moreau(double x, double level) const;

    /// Yosida gradient n (x - J_n x).
    double yosida_grad(double x, double level) const;

    /// Subdifferential as a closed interval with +-inf sentinels; nullopt off
    /// the domain. Custom kinds use one-sided difference quotients.
    std::optional<Interval> subdifferential(double x) const;

    /// Projection onto the closed domain.
    double project(double x) const { return domain_.clamp(x); }

    const Interval& domain() const noexcept { return domain_; }
    const Kind& kind() const noexcept { return kind_; }

    bool is_indicator() const noexcept { return std::holds_alternative<IndicatorInterval>(kind_); }
    /// True when prox goes through the iterative 1-D minimizer.
    bool uses_numeric_prox() const noexcept;
    /// True when psi vanishes identically, so the Yosida gradient is zero everywhere.
    bool is_identically_zero() const noexcept;

private:
    ConvexPotential(Kind kind, Interval domain) : kind_(std::move(kind)), domain_(domain) {}

    Kind kind_;
    Interval domain_;
};

/// psi viewed at penalization level n (any positive real).
class YosidaView {
public:
    YosidaView(const ConvexPotential& potential, double level);

    double prox(double x) const { return potential_->prox(x, level_); }
    double moreau(double x) const { return potential_->moreau(x, level_); }
    double grad(double x) const { return potential_->yosida_grad(x, level_); }

    double level() const noexcept { return level_; }
    const ConvexPotential& potential() const noexcept { return *potential_; }

private:
    const ConvexPotential* potential_;
    double level_;
};

/// Unique y with y + delta * grad(psi^n)(y) = w.
///
/// Uses the resolvent identity for Moreau envelopes:
///   y = w + (delta n / (1 + delta n)) (J_{n'} w - w),  n' = n / (1 + delta n),
/// so every kind reuses its own prox and indicators stay in closed form.
double implicit_penalization_solve(const ConvexPotential& psi, double level, double delta, double w);

}  // namespace mvsim
