#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvsim {

enum class ErrorCode {
    InvalidArgument,
    NumericNonconvergence,
    EmptySample,
    NonFiniteSample,
    InvalidOrder,
    NonFiniteCoefficient,
    NonFiniteState,
    StiffnessViolation,
    RegressionSingular,
    PicardNonconvergence,
    GridMismatch,
    SeedMismatch,
    InsufficientSweep,
    TestPathOutsideDomain,
    ConstructionError,
    ConfigError,
    UnknownSuite,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception carrying a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mvsim
