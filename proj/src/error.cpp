#include "mvsim/error.hpp"

namespace mvsim {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NumericNonconvergence: return "NumericNonconvergence";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::NonFiniteSample: return "NonFiniteSample";
        case ErrorCode::InvalidOrder: return "InvalidOrder";
        case ErrorCode::NonFiniteCoefficient: return "NonFiniteCoefficient";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::StiffnessViolation: return "StiffnessViolation";
        case ErrorCode::RegressionSingular: return "RegressionSingular";
        case ErrorCode::PicardNonconvergence: return "PicardNonconvergence";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::SeedMismatch: return "SeedMismatch";
        case ErrorCode::InsufficientSweep: return "InsufficientSweep";
        case ErrorCode::TestPathOutsideDomain: return "TestPathOutsideDomain";
        case ErrorCode::ConstructionError: return "ConstructionError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::UnknownSuite: return "UnknownSuite";
    }
    return "Unknown";
}

}  // namespace mvsim
