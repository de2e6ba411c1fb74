#pragma once

#include "mvsim/coefficients.hpp"
#include "mvsim/convex_potential.hpp"
#include "mvsim/forward_solver.hpp"

#include <span>
#include <utility>
#include <vector>

namespace mvsim {

/// Least-squares conditional expectation on monomials of the standardized
/// state (x - mean) / std. A degenerate slice falls back to the constant basis.
struct RegressionConfig {
    unsigned degree = 3;
    double ridge = 1e-10;

    void validate() const;
};

struct BackwardConfig {
    double penalization = 100.0;
    /// Driver is switched off once max_{j<=k} |X_j| exceeds this radius.
    double truncation = kInf;
    RegressionConfig regression;
    unsigned picard_sweeps = 3;
    double picard_tolerance = 1e-8;
    /// Throw PicardNonconvergence instead of only flagging it.
    bool strict_picard = false;
    unsigned threads = 1;

    void validate() const;
};

/// Matrices are time-major like ForwardSolution: (particle i, step k) at
/// k * particles + i. phi2 increment k is attached to Y_k.
struct BackwardSolution {
    double horizon = 0.0;
    std::size_t steps = 0;
    std::size_t particles = 0;
    double penalization = 0.0;
    double truncation = kInf;
    Interval domain;  // closed domain of psi2

    std::vector<double> times;
    std::vector<double> Y;     // (M + 1) x N
    std::vector<double> Z;     // M x N
    std::vector<double> phi2;  // M x N
    /// Per-particle realized value Y_T + sum_k (Y_k - E[Y_{k+1} | X_k]); its
    /// sample mean tracks Y_0 and its spread gives a Monte Carlo error for Y_0.
    std::vector<double> pathwise;

    unsigned sweeps = 0;
    double picard_gap = 0.0;  // max-norm change of Y in the last sweep, 0 if one sweep sufficed
    bool picard_converged = true;

    double dt() const { return horizon / static_cast<double>(steps); }
    double y(std::size_t particle, std::size_t step) const { return Y[step * particles + particle]; }
    double z(std::size_t particle, std::size_t step) const { return Z[step * particles + particle]; }
    double dphi2(std::size_t particle, std::size_t step) const { return phi2[step * particles + particle]; }
    std::span<const double> y_slice(std::size_t step) const;

    /// Mean over particles and steps of dist(Y_k, closed domain).
    double mean_violation() const;
    /// Mean of Y_0 with the standard error of the pathwise values.
    std::pair<double, double> y0_estimate() const;
};

/// Fitted values of E[target | x] at every sample point. Exposed for tests.
std::vector<double> regress(std::span<const double> x, std::span<const double> target, const RegressionConfig& reg,
                            unsigned threads = 1);

/// Backward Euler recursion for the truncated penalized backward equation on a
/// frozen forward solution (which must carry full paths).
BackwardSolution solve_penalized_bsde(const ForwardSolution& fwd, const BackwardCoefficients& bc,
                                      const ConvexPotential& psi2, const BackwardConfig& cfg);

}  // namespace mvsim
