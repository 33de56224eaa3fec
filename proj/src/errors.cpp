#include "morseflow/errors.hpp"

namespace morseflow {

const char* code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ScenarioError: return "ScenarioError";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorCode::NotAComplex: return "NotAComplex";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::NotCritical: return "NotCritical";
        case ErrorCode::EulerMismatch: return "EulerMismatch";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::LeftBoundingBox: return "LeftBoundingBox";
        case ErrorCode::Inconclusive: return "Inconclusive";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::MissingModuli: return "MissingModuli";
        case ErrorCode::GluingGap: return "GluingGap";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::DegenerateCritical: return "DegenerateCritical";
        case ErrorCode::MorseSmaleFailure: return "MorseSmaleFailure";
        case ErrorCode::NonGenericHomotopy: return "NonGenericHomotopy";
        case ErrorCode::NonTransverse: return "NonTransverse";
        case ErrorCode::ClearanceViolation: return "ClearanceViolation";
        case ErrorCode::NotACycle: return "NotACycle";
        case ErrorCode::NotIso: return "NotIso";
    }
    return "Error";
}

int exit_class(ErrorCode c) {
    switch (c) {
        case ErrorCode::ScenarioError:
        case ErrorCode::SyntaxError:
        case ErrorCode::UnknownIdentifier:
        case ErrorCode::NotAComplex:
            return 1;
        case ErrorCode::DomainError:
        case ErrorCode::NoConvergence:
        case ErrorCode::Degenerate:
        case ErrorCode::NotCritical:
        case ErrorCode::EulerMismatch:
        case ErrorCode::StepFailure:
        case ErrorCode::LeftBoundingBox:
        case ErrorCode::Inconclusive:
        case ErrorCode::IllConditioned:
        case ErrorCode::MissingModuli:
        case ErrorCode::GluingGap:
        case ErrorCode::Overflow:
            return 2;
        case ErrorCode::DegenerateCritical:
        case ErrorCode::MorseSmaleFailure:
        case ErrorCode::NonGenericHomotopy:
        case ErrorCode::NonTransverse:
        case ErrorCode::ClearanceViolation:
            return 3;
        case ErrorCode::NotACycle:
        case ErrorCode::NotIso:
            return 4;
    }
    return 2;
}

}  // namespace morseflow
