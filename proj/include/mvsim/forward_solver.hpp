#pragma once

#include "mvsim/coefficients.hpp"
#include "mvsim/convex_potential.hpp"
#include "mvsim/measures.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace mvsim {

struct ConstantInitial {
    double value = 0.0;
};
struct UniformInitial {
    double a = 0.0;
    double b = 1.0;
};
struct GaussianInitial {
    double mean = 0.0;
    double stddev = 1.0;
};
/// Particle i starts at values[i % values.size()].
struct SampleInitial {
    std::vector<double> values;
};

using InitialLaw = std::variant<ConstantInitial, UniformInitial, GaussianInitial, SampleInitial>;

enum class PenaltyMode { explicit_euler, splitting };

struct SolverConfig {
    double horizon = 1.0;
    std::size_t steps = 100;
    std::size_t particles = 1000;
    std::uint64_t seed = 0;
    double penalization = 100.0;
    PenaltyMode mode = PenaltyMode::splitting;
    InitialLaw initial = ConstantInitial{};
    /// Keep the full particle x step matrices. Summaries are always kept.
    bool store_paths = true;
    /// Common-random-number grid: when nonzero, Brownian increments are sums of
    /// draws on this finer grid, so runs with different `steps` dividing it
    /// share one Brownian path per particle.
    std::size_t crn_fine_steps = 0;
    unsigned threads = 1;

    double dt() const { return horizon / static_cast<double>(steps); }
    void validate() const;
};

double sample_initial(const InitialLaw& law, std::uint64_t seed, std::size_t particle);

enum class Scheme { mvsde, penalized_explicit, penalized_splitting, projection };

/// Which state a recorded increment dphi_k (over [t_k, t_{k+1}]) is attached
/// to: the left state X_k (explicit penalization) or the post-step state
/// X_{k+1} (implicit penalization, projection).
enum class IncrementAnchor { left, right };

struct StepStats {
    double mean = 0.0;
    double abs_moment1 = 0.0;
    double abs_moment2 = 0.0;
};

/// Particle solution of the forward equation. Matrices are stored time-major:
/// entry (particle i, step k) lives at k * particles + i.
struct ForwardSolution {
    Scheme scheme = Scheme::mvsde;
    IncrementAnchor anchor = IncrementAnchor::left;
    double horizon = 0.0;
    std::size_t steps = 0;
    std::size_t particles = 0;
    std::uint64_t seed = 0;
    std::size_t noise_steps = 0;  // size of the grid the Brownian draws live on
    double penalization = 0.0;    // 0 when no penalization is applied
    Interval domain;              // closed domain of the constraint, R if none

    std::vector<double> times;  // M + 1
    bool has_paths = false;
    std::vector<double> states;       // (M + 1) x N
    std::vector<double> increments;   // M x N, dphi
    std::vector<double> brownian;     // M x N, dB

    // Per-particle summaries (always present).
    std::vector<double> initial;
    std::vector<double> terminal;
    std::vector<double> sup_abs;        // max_k |X_k|
    std::vector<double> sup_grad;       // max_k |grad psi^n(X_k)| (penalized schemes)
    std::vector<double> phi_total;      // sum_k dphi_k
    std::vector<double> phi_variation;  // sum_k |dphi_k|

    std::vector<StepStats> step_stats;  // M + 1

    double dt() const { return horizon / static_cast<double>(steps); }
    double x(std::size_t particle, std::size_t step) const { return states[step * particles + particle]; }
    double dphi(std::size_t particle, std::size_t step) const { return increments[step * particles + particle]; }
    double dB(std::size_t particle, std::size_t step) const { return brownian[step * particles + particle]; }
    std::span<const double> slice(std::size_t step) const;
    EmpiricalMeasure measure_at(std::size_t step) const;

    /// Mean distance of X_T to the closed domain.
    double terminal_violation() const;
};

/// Interacting-particle Euler scheme with coefficients frozen at the left grid
/// point and the law replaced by the empirical measure of all particles.
ForwardSolution simulate_mvsde(const ForwardCoefficients& fc, const SolverConfig& cfg);

/// Euler scheme with the subdifferential replaced by the Yosida gradient at
/// level cfg.penalization, in explicit or splitting mode.
ForwardSolution simulate_mvsvi_penalized(const ForwardCoefficients& fc, const ConvexPotential& psi,
                                         const SolverConfig& cfg);

/// Euler step followed by clamping to `domain`; the clamp displacement is
/// recorded as dphi.
ForwardSolution simulate_reflected_projection(const ForwardCoefficients& fc, const Interval& domain,
                                              const SolverConfig& cfg);

}  // namespace mvsim
