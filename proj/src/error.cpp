#include "etod/error.hpp"

namespace etod {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NoInteriorMinimum: return "NoInteriorMinimum";
    case ErrorCode::DegenerateParameter: return "DegenerateParameter";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::ZeroCount: return "ZeroCount";
    case ErrorCode::SeparationDetected: return "SeparationDetected";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::NoFeasibleCandidate: return "NoFeasibleCandidate";
    case ErrorCode::InfeasibleFloor: return "InfeasibleFloor";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::TooManyDiscards: return "TooManyDiscards";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{}

}  // namespace etod
