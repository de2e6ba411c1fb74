#pragma once

#include "mvsim/backward_solver.hpp"
#include "mvsim/convex_potential.hpp"
#include "mvsim/forward_solver.hpp"

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mvsim {

/// Sample mean with its Monte Carlo standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

Estimate mean_estimate(std::span<const double> values);

// ---------------------------------------------------------------------------
// Yamada-Watanabe function
// ---------------------------------------------------------------------------

/// V with V'' = phi(|x|), phi(x) = rho(x) / (x ln delta) supported on
/// [eps/delta, eps]. rho is a trapezoid: linear ramps over the outer `taper`
/// fractions of the support, plateau r in between, r fixed by int phi = 1.
class YamadaWatanabeFn {
public:
    YamadaWatanabeFn(double epsilon, double delta, double taper = 0.1);

    double epsilon() const { return eps_; }
    double delta() const { return delta_; }
    double plateau() const { return r_; }
    /// Breakpoints eps/delta, x1, x2, eps.
    const std::array<double, 4>& breakpoints() const { return s_; }

    double eval(double x) const;
    double d1(double x) const;
    double d2(double x) const;

    /// phi on (0, inf); zero off the support.
    double density(double x) const;

private:
    double eps_, delta_, log_delta_;
    double r_ = 0.0;
    std::array<double, 4> s_{};
    // On piece j (between s_j and s_{j+1}) phi(x) = alpha_j / x + beta_j.
    std::array<double, 3> alpha_{}, beta_{};
    // V' and V at the left end of each piece and at eps.
    std::array<double, 4> d1_at_{}, v_at_{};
};

inline double yw_eval(const YamadaWatanabeFn& f, double x) { return f.eval(x); }
inline double yw_d1(const YamadaWatanabeFn& f, double x) { return f.d1(x); }
inline double yw_d2(const YamadaWatanabeFn& f, double x) { return f.d2(x); }

// ---------------------------------------------------------------------------
// Refinement gaps and moments
// ---------------------------------------------------------------------------

/// ((1/N) sum_i sup_k |a_k^i - b_{k*factor}^i|^p)^(1/p) for b refining a on a
/// shared noise grid. Throws SeedMismatch / GridMismatch.
double cauchy_gap(const ForwardSolution& a, const ForwardSolution& b, double p);
/// Same gap with a delta-method standard error.
Estimate cauchy_gap_estimate(const ForwardSolution& a, const ForwardSolution& b, double p);

/// (1/N) sum_i sup_k |Y^a_k - Y^b_k|^2 on a common grid.
Estimate backward_sup_gap(const BackwardSolution& a, const BackwardSolution& b);

struct MomentEntry {
    double p = 0.0;
    Estimate estimator;        // (1/N) sum_i sup_k |path_k^i|^p
    double reference = 0.0;    // (1/N) sum_i |start^i|^p
    double ratio = 0.0;        // estimator / (1 + reference)
};

struct MomentReport {
    std::vector<MomentEntry> entries;
    const MomentEntry* find(double p) const;
};

/// Reference is the initial condition for forward solutions.
MomentReport moment_report(const ForwardSolution& s, std::span<const double> ps);
/// Reference is the terminal value Y_T for backward solutions.
MomentReport moment_report(const BackwardSolution& s, std::span<const double> ps);

/// (1/N) sum_i (sum_k |dphi_k^i|)^2.
Estimate phi_variation_moment(const ForwardSolution& s);

struct BackwardEnergy {
    Estimate sup_y2;        // (1/N) sum_i sup_k |Y_k^i|^2
    double z_energy = 0.0;  // (dt/N) sum_{i,k} |Z_k^i|^2
    double grad_energy = 0.0;  // (dt/N) sum_{i,k} |grad psi2^n(Y_k^i)|^2
};

BackwardEnergy backward_energy(const BackwardSolution& s);

// ---------------------------------------------------------------------------
// Sweeps and fits
// ---------------------------------------------------------------------------

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least squares of log gap on log resolution. Throws InsufficientSweep.
LogLogFit rate_fit(std::span<const std::pair<double, double>> pairs);

struct GrowthReport {
    std::vector<double> levels;
    std::vector<Estimate> values;  // (1/N) sum_i sup_k |grad psi^n(X_k^i)|^4
    LogLogFit fit;
    bool degenerate_zero = false;
    double bound = 4.0;
    bool pass = true;
};

GrowthReport penalization_growth(std::span<const std::pair<double, const ForwardSolution*>> sweep);

// ---------------------------------------------------------------------------
// Variational inequality
// ---------------------------------------------------------------------------

using TestPath = std::function<double(double t)>;

inline TestPath constant_path(double c) {
    return [c](double) { return c; };
}

struct ViReport {
    std::vector<double> residuals;  // per particle
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

/// r^i = sum_k (rho - A_k^i) dphi_k^i + sum_k E(A_k^i) dt - sum_k psi(rho) dt,
/// where A_k is the state the increment is attached to and E is psi^n for
/// penalized solutions, psi otherwise. Throws TestPathOutsideDomain.
ViReport vi_residual(const ForwardSolution& s, const ConvexPotential& psi, const TestPath& rho,
                     double rel_tolerance = 1e-6);
ViReport vi_residual(const BackwardSolution& s, const ConvexPotential& psi2, const TestPath& rho,
                     double rel_tolerance = 1e-6);

/// Per particle sum_k (A_k - A'_k)(dphi_k - dphi'_k) for two solutions on a
/// common grid.
std::vector<double> monotone_coupling(const ForwardSolution& a, const ForwardSolution& b);

}  // namespace mvsim
