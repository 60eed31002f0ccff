#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bevkit {

enum class ErrorCode {
    MalformedRow,
    EmptyFile,
    NoFrames,
    DuplicateFrameId,
    NonMonotoneTimestamps,
    InvalidConfig,
    OutOfGrid,
    DimensionMismatch,
    TooFewFrames,
    GridTooSmall,
    ProtocolError,
    Timeout,
    ProcessExit,
    FrameOrderViolation,
    NoSamples,
    EmptyMask,
    TooFewPoints,
    UnknownGround,
    NonPositiveDim,
    TooShort,
    Empty,
    DegenerateBox,
    TimeOutOfRange,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code. All library failures
/// surface as this type so callers can branch on `code()`.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bevkit
