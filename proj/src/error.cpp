#include "illumine/error.hpp"

namespace illumine {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyTerm: return "EmptyTerm";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::NoVector: return "NoVector";
        case ErrorCode::EmptySpace: return "EmptySpace";
        case ErrorCode::KeyMissing: return "KeyMissing";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::UnknownSnapshot: return "UnknownSnapshot";
        case ErrorCode::NotASubset: return "NotASubset";
        case ErrorCode::SelfLoop: return "SelfLoop";
        case ErrorCode::DuplicateEdge: return "DuplicateEdge";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::UnknownEdge: return "UnknownEdge";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::UnknownImage: return "UnknownImage";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::NoOpChange: return "NoOpChange";
        case ErrorCode::DuplicateLabel: return "DuplicateLabel";
        case ErrorCode::CorruptLog: return "CorruptLog";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnknownJob: return "UnknownJob";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace illumine
