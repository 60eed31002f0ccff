#include "bevkit/error.hpp"

namespace bevkit {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::NoFrames: return "NoFrames";
        case ErrorCode::DuplicateFrameId: return "DuplicateFrameId";
        case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::OutOfGrid: return "OutOfGrid";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooFewFrames: return "TooFewFrames";
        case ErrorCode::GridTooSmall: return "GridTooSmall";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::ProcessExit: return "ProcessExit";
        case ErrorCode::FrameOrderViolation: return "FrameOrderViolation";
        case ErrorCode::NoSamples: return "NoSamples";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::UnknownGround: return "UnknownGround";
        case ErrorCode::NonPositiveDim: return "NonPositiveDim";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::DegenerateBox: return "DegenerateBox";
        case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace bevkit
