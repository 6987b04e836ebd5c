#pragma once

#include <stdexcept>
#include <string>

namespace exittime {

enum class ErrorCode {
    InvalidArgument,
    NotDissipative,
    NonFinite,
    DomainError,
    EllipticityViolated,
    SingularSystem,
    OffLattice,
    NoDecay,
    NotConverged,
    StepCollapse,
    IllConditioned,
    NoBracket,
    SymmetryUnavailable,
    InvalidConfig,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library names the operation that produced it,
// e.g. "periodic.solve_banach".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string operation, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string& operation() const noexcept { return operation_; }

private:
    ErrorCode code_;
    std::string operation_;
};

}  // namespace exittime
