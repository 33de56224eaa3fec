#pragma once

#include <stdexcept>
#include <string>

namespace morseflow {

// Error taxonomy. exit_class() groups codes into the CLI exit codes:
//   1 = invalid scenario/input, 2 = numerical failure,
//   3 = genericity failure, 4 = mathematical check failed.
enum class ErrorCode {
    ScenarioError,
    SyntaxError,
    UnknownIdentifier,
    NotAComplex,

    DomainError,
    NoConvergence,
    Degenerate,
    NotCritical,
    EulerMismatch,
    StepFailure,
    LeftBoundingBox,
    Inconclusive,
    IllConditioned,
    MissingModuli,
    GluingGap,
    Overflow,

    DegenerateCritical,
    MorseSmaleFailure,
    NonGenericHomotopy,
    NonTransverse,
    ClearanceViolation,

    NotACycle,
    NotIso,
};

const char* code_name(ErrorCode c);
int exit_class(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(code_name(code)) + ": " + msg), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

}  // namespace morseflow
