#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvsim {

/// One property check. `margin` is threshold minus measured value (or the
/// analogous slack), so a passing check has margin >= 0.
struct PropertyCheck {
    std::string suite;
    std::string name;
    bool pass = true;
    double measured = 0.0;
    double threshold = 0.0;
    double margin = 0.0;
    std::string detail;
};

/// Names accepted by run_suite: convex, yw, wasserstein, moments,
/// penalization, vi. "all" runs every suite.
const std::vector<std::string>& suite_names();

/// Throws UnknownSuite for other names.
std::vector<PropertyCheck> run_suite(const std::string& name, unsigned threads = 1);

std::vector<PropertyCheck> convex_suite();
std::vector<PropertyCheck> yw_suite();
std::vector<PropertyCheck> wasserstein_suite(std::size_t cases = 200, std::uint64_t seed = 7);
std::vector<PropertyCheck> moments_suite(unsigned threads = 1);
std::vector<PropertyCheck> penalization_suite(unsigned threads = 1);
std::vector<PropertyCheck> vi_suite(unsigned threads = 1);

/// Exact optimal transport cost between two uniform empirical measures by an
/// assignment over replicated atoms (sizes up to a few dozen). Returns W_p.
double transport_lp_wasserstein(double p, std::span<const double> x, std::span<const double> y);

}  // namespace mvsim
