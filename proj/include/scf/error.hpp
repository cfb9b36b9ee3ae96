#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scf {

enum class ErrorCode {
    DimensionMismatch,
    InvalidArgument,
    InvalidConfig,
    ParseError,
    TriggerNotMet,
    SegmentLeavesOmega1,
    QuadratureBudgetExhausted,
    OrbitDiesBeforeImpulse,
    NotInOmega1,
    NonpositiveMu,
    BelowThreshold,
    NonMonotone,
    StepSizeUnderflow,
    NonFiniteState,
    UpwardCrossing,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::TriggerNotMet: return "trigger_not_met";
    case ErrorCode::SegmentLeavesOmega1: return "segment_leaves_omega1";
    case ErrorCode::QuadratureBudgetExhausted: return "quadrature_budget_exhausted";
    case ErrorCode::OrbitDiesBeforeImpulse: return "orbit_dies_before_impulse";
    case ErrorCode::NotInOmega1: return "not_in_omega1";
    case ErrorCode::NonpositiveMu: return "nonpositive_mu";
    case ErrorCode::BelowThreshold: return "below_threshold";
    case ErrorCode::NonMonotone: return "non_monotone";
    case ErrorCode::StepSizeUnderflow: return "step_size_underflow";
    case ErrorCode::NonFiniteState: return "non_finite_state";
    case ErrorCode::UpwardCrossing: return "upward_crossing";
    }
    return "unknown";
}

/// Numerical or contract failure raised by every scf operation.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace scf
