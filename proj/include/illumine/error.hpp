#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace illumine {

enum class ErrorCode {
    EmptyTerm,
    ParseError,
    DanglingReference,
    NoVector,
    EmptySpace,
    KeyMissing,
    DimensionMismatch,
    EmptySelection,
    EmptyInput,
    UnknownSnapshot,
    NotASubset,
    SelfLoop,
    DuplicateEdge,
    UnknownNode,
    UnknownEdge,
    CycleDetected,
    UnknownImage,
    UnknownLabel,
    NoOpChange,
    DuplicateLabel,
    CorruptLog,
    InvalidArgument,
    UnknownJob,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Carries the id of the already-registered term so callers can reuse it.
class DuplicateLabelError : public Error {
public:
    explicit DuplicateLabelError(std::string existing_id)
        : Error(ErrorCode::DuplicateLabel, "label already exists as '" + existing_id + "'"),
          existing_id_(std::move(existing_id)) {}

    const std::string& existing_id() const noexcept { return existing_id_; }

private:
    std::string existing_id_;
};

class CorruptLogError : public Error {
public:
    CorruptLogError(long long first_bad_seq, const std::string& why)
        : Error(ErrorCode::CorruptLog, "seq " + std::to_string(first_bad_seq) + ": " + why),
          first_bad_seq_(first_bad_seq) {}

    long long first_bad_seq() const noexcept { return first_bad_seq_; }

private:
    long long first_bad_seq_;
};

}  // namespace illumine
