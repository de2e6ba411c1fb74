#pragma once

#include "mvsim/backward_solver.hpp"
#include "mvsim/coefficients.hpp"
#include "mvsim/convex_potential.hpp"
#include "mvsim/forward_solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mvsim {

inline constexpr const char* kVersion = "0.1.0";

struct BackwardSpec {
    BackwardCoefficients coefficients;
    ConvexPotential potential = ConvexPotential::zero();
    BackwardConfig config;
};

struct SweepSpec {
    enum class Axis { steps, penalization };
    Axis axis = Axis::steps;
    std::vector<double> values;
    double p = 2.0;
};

struct Scenario {
    std::string name = "scenario";
    nlohmann::json source;  // the parsed file, echoed into report.json
    ForwardCoefficients forward;
    std::optional<ConvexPotential> potential;
    Scheme scheme = Scheme::mvsde;
    SolverConfig solver;
    std::optional<BackwardSpec> backward;
    std::vector<double> moments{2.0, 4.0};
    std::optional<double> vi_test_value;  // constant test path; defaults to the projection of 0
    std::optional<SweepSpec> sweep;
    std::filesystem::path output = "out";
    bool write_paths = true;
};

/// Parses a scenario. Unknown keys and a missing solver.seed raise ConfigError
/// naming the key.
Scenario load_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<unsigned> threads;
};

/// Loads a file and applies the overrides; a --seed also fills a missing
/// solver.seed.
Scenario load_scenario_file(const std::filesystem::path& path, const RunOptions& opts);

/// Applies command-line overrides to a loaded scenario (and its echo).
void apply_overrides(Scenario& sc, const RunOptions& opts);

ForwardSolution simulate(const Scenario& sc);

/// Commands write their artifacts into sc.output and return the exit status.
int run_forward(const Scenario& sc);
int run_fbsvs(const Scenario& sc);
int rate_study(const Scenario& sc);
int check_properties(const std::string& suite, const std::filesystem::path& out, unsigned threads = 1);

/// 2 for configuration problems, 3 for numeric and solver failures.
int exit_code_for(const std::exception& e);

/// Shortest round-trip decimal form.
std::string format_real(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
/// Parses a field written by format_real; empty fields read as NaN.
double parse_real(const std::string& field);

}  // namespace mvsim
