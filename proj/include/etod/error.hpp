#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace etod {

enum class ErrorCode {
    InvalidParameter,
    DimensionMismatch,
    NonFiniteEvaluation,
    NotSymmetric,
    SingularMatrix,
    NoInteriorMinimum,
    DegenerateParameter,
    SingularInformation,
    ZeroCount,
    SeparationDetected,
    RankDeficient,
    DegenerateDirection,
    BudgetTooSmall,
    NoFeasibleCandidate,
    InfeasibleFloor,
    UnstableStep,
    TooManyDiscards,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the harness, the CLI) can branch on the kind of failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace etod
