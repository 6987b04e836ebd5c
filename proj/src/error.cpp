#include "exittime/error.hpp"

namespace exittime {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotDissipative: return "NotDissipative";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::EllipticityViolated: return "EllipticityViolated";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::OffLattice: return "OffLattice";
        case ErrorCode::NoDecay: return "NoDecay";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::StepCollapse: return "StepCollapse";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::SymmetryUnavailable: return "SymmetryUnavailable";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string operation, const std::string& detail)
    : std::runtime_error(operation + ": " + to_string(code) + ": " + detail),
      code_(code),
      operation_(std::move(operation)) {}

}  // namespace exittime
