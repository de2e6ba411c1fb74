#pragma once

#include "mvsim/backward_solver.hpp"
#include "mvsim/coefficients.hpp"
#include "mvsim/convex_potential.hpp"
#include "mvsim/forward_solver.hpp"

// Built-in scenarios shared by the property suites, the CLI defaults and the
// tests.
namespace mvsim::builtin {

/// b = -0.5 x + 0.25 mean, sigma = |x|^0.75, xi ~ U(-1, 1).
inline ForwardCoefficients holder_coefficients() {
    return {MeanFieldLinearDrift{-0.5, 0.25}, PowerDiffusion{1.0, 0.75, 0.0}};
}
inline InitialLaw holder_initial() { return UniformInitial{-1.0, 1.0}; }
inline ConvexPotential holder_potential() { return ConvexPotential::indicator_interval(-2.0, 2.0); }

/// b = -x + 0.5 mean, sigma = 0.5 (1 + |x|), xi = 1.
inline ForwardCoefficients lipschitz_coefficients() {
    return {MeanFieldLinearDrift{-1.0, 0.5}, PowerDiffusion{0.5, 1.0, 1.0}};
}
inline InitialLaw lipschitz_initial() { return ConstantInitial{1.0}; }

/// Driftless unit Brownian motion.
inline ForwardCoefficients brownian_coefficients() { return {ConstantDrift{0.0}, ConstantDiffusion{1.0}}; }
inline ConvexPotential half_line() { return ConvexPotential::indicator_interval(0.0, kInf); }

/// Backward system on Brownian motion with G = x^2, F = -2 and Y kept in
/// [0, inf): the unconstrained solution x^2 - (T - t) leaves the domain.
inline BackwardCoefficients constrained_backward() {
    BackwardCoefficients bc;
    bc.driver = LinearDriver{0.0, 0.0, 0.0, 0.0, -2.0};
    bc.terminal = SquareTerminal{};
    return bc;
}

}  // namespace mvsim::builtin
