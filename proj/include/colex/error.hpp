#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace colex {

enum class ErrorCode {
    CountMismatch,
    NegativeCount,
    StructureMismatch,
    LengthMismatch,
    TypeMismatch,
    MissingDefault,
    IndexOutOfBounds,
    DivisionByZero,
    InvalidName,
    DuplicateName,
    EmptyFieldSet,
    DuplicateAxisName,
    EmptyAxisList,
    IncompatibleAxes,
    UnknownAxis,
    MalformedPayload,
    ShapeMismatch,
    NonMonotonicEdges,
    NaNInput,
    SchemaMismatch,
    IoError,
    BadMagic,
    UnsupportedVersion,
    MalformedHeader,
    UnknownColumn,
    RangeOutOfBounds,
    CacheCorrupt,
    ProcessorFailed,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception type. `code()` identifies the failure class so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

/// A chunk whose processing failed after exhausting its retry budget.
class ProcessorError : public Error {
public:
    ProcessorError(std::int64_t chunk_index, const std::string& message)
        : Error(ErrorCode::ProcessorFailed,
                "chunk " + std::to_string(chunk_index) + ": " + message),
          chunk_index_(chunk_index) {}

    std::int64_t chunk_index() const noexcept { return chunk_index_; }

private:
    std::int64_t chunk_index_;
};

}  // namespace colex
