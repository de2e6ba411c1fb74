#pragma once

#include "mvsim/measures.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mvsim {

// ---------------------------------------------------------------------------
// Forward coefficients b(t, x, mu) and sigma(t, x)
// ---------------------------------------------------------------------------

/// b = a x + b_bar * mean(mu)
struct MeanFieldLinearDrift {
    double a = 0.0;
    double b_bar = 0.0;
};

struct ConstantDrift {
    double value = 0.0;
};

struct CustomDrift {
    std::function<double(double t, double x, const MeasureStats& mu)> fn;
};

using DriftSpec = std::variant<MeanFieldLinearDrift, ConstantDrift, CustomDrift>;

/// sigma = c (smoothing + |x|)^theta
struct PowerDiffusion {
    double c = 1.0;
    double theta = 1.0;
    double smoothing = 0.0;
};

struct ConstantDiffusion {
    double value = 0.0;
};

struct CustomDiffusion {
    std::function<double(double t, double x)> fn;
};

using DiffusionSpec = std::variant<PowerDiffusion, ConstantDiffusion, CustomDiffusion>;

struct ForwardCoefficients {
    DriftSpec drift = ConstantDrift{};
    DiffusionSpec diffusion = ConstantDiffusion{};
};

double eval_drift(const ForwardCoefficients& fc, double t, double x, const MeasureStats& mu);
double eval_drift(const ForwardCoefficients& fc, double t, double x, const EmpiricalMeasure& mu);
double eval_diffusion(const ForwardCoefficients& fc, double t, double x);

/// Hoelder index alpha = theta - 1/2 when the diffusion is in the locally
/// Hoelder class (theta in (1/2, 1]); constant diffusions report 1/2.
std::optional<double> holder_index(const ForwardCoefficients& fc);

/// Built-in descriptors whose structure satisfies the forward growth and
/// modulus conditions for suitable constants.
bool claims_forward_assumptions(const ForwardCoefficients& fc);

// ---------------------------------------------------------------------------
// Backward coefficients F(t, x, y, z, mu, nu) and G(x, mu)
// ---------------------------------------------------------------------------

struct ZeroDriver {};

/// F = y_coef*y + z_coef*z + x_coef*x + mean_y_coef*mean(nu) + constant
struct LinearDriver {
    double y_coef = 0.0;
    double z_coef = 0.0;
    double x_coef = 0.0;
    double mean_y_coef = 0.0;
    double constant = 0.0;
};

/// F = coef * sign(y) |y|^k
struct CappedPowerDriver {
    double coef = -1.0;
    double k = 0.5;
};

/// F = y_coef*tanh(y) + z_coef*tanh(z) + x_coef*x + constant
struct SaturatingDriver {
    double y_coef = 0.0;
    double z_coef = 0.0;
    double x_coef = 0.0;
    double constant = 0.0;
};

struct CustomDriver {
    std::function<double(double t, double x, double y, double z, const MeasureStats& mu,
                         const MeasureStats& nu)>
        fn;
};

using DriverSpec = std::variant<ZeroDriver, LinearDriver, CappedPowerDriver, SaturatingDriver, CustomDriver>;

struct IdentityTerminal {};
struct SquareTerminal {};

/// G = x_coef*x + mean_coef*mean(mu) + constant
struct LinearTerminal {
    double x_coef = 1.0;
    double mean_coef = 0.0;
    double constant = 0.0;
};

struct CustomTerminal {
    std::function<double(double x, const MeasureStats& mu)> fn;
};

using TerminalSpec = std::variant<IdentityTerminal, SquareTerminal, LinearTerminal, CustomTerminal>;

struct BackwardCoefficients {
    DriverSpec driver = ZeroDriver{};
    TerminalSpec terminal = IdentityTerminal{};
    double l = 2.0;  // > 1
    double k = 0.5;  // in (0, 1)
};

void validate_exponents(const BackwardCoefficients& bc);

double eval_driver(const BackwardCoefficients& bc, double t, double x, double y, double z,
                   const MeasureStats& mu, const MeasureStats& nu);
double eval_driver(const BackwardCoefficients& bc, double t, double x, double y, double z,
                   const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double eval_terminal(const BackwardCoefficients& bc, double x, const MeasureStats& mu);
double eval_terminal(const BackwardCoefficients& bc, double x, const EmpiricalMeasure& mu);

/// Whether F reads y or the law of Y (decides if Picard sweeps are needed).
bool driver_depends_on_y(const BackwardCoefficients& bc);

bool claims_backward_assumptions(const BackwardCoefficients& bc);

// ---------------------------------------------------------------------------
// Sampling falsifier for the growth / modulus assumptions
// ---------------------------------------------------------------------------

struct AssumptionProfile {
    double growth = 1.0;       // C in the growth bounds
    double alpha = 0.5;        // Hoelder index in (0, 1/2]
    double log_modulus = 1.0;  // C in C ln(e + |x| + |x'|)
    /// L_R of the backward local-Lipschitz condition; defaults to the largest
    /// value admitted by exp(L_R^2) <= C (1 + R).
    std::function<double(double R)> backward_lipschitz;
    double truncation_radius = std::numeric_limits<double>::infinity();

    double lipschitz_at(double R) const;
    void validate() const;
};

struct GridSpec {
    double x_min = -50.0;
    double x_max = 50.0;
    std::size_t points = 100;  // all ordered pairs are scanned: points^2
    std::vector<double> times{0.0, 0.5, 1.0};
};

struct ConditionCheck {
    std::string name;
    double worst_ratio = 0.0;
    double worst_x = 0.0;
    double worst_x_other = 0.0;
    bool pass = true;
};

/// Sampling check only: a failing condition is a counterexample, a passing one
/// certifies nothing beyond the grid.
struct ValidationReport {
    std::vector<ConditionCheck> checks;

    bool pass() const;
    const ConditionCheck* find(const std::string& name) const;
};

ValidationReport validate_assumptions(const ForwardCoefficients& fc, const AssumptionProfile& profile,
                                      const GridSpec& grid = {});
ValidationReport validate_assumptions(const BackwardCoefficients& bc, const AssumptionProfile& profile,
                                      const GridSpec& grid = {});

}  // namespace mvsim
