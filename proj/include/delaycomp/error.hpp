#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delaycomp {

enum class ErrorCode {
    NonPositiveSpeed,
    InvalidParameter,
    GridMismatch,
    OutOfDomain,
    NoConvergence,
    InsufficientHistory,
    CFLViolation,
    NonFiniteState,
    InconclusiveContour,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveSpeed: return "NonPositiveSpeed";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InconclusiveContour: return "InconclusiveContour";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace delaycomp
