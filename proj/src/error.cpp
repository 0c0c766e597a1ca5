#include "colex/error.hpp"

namespace colex {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CountMismatch: return "count mismatch";
        case ErrorCode::NegativeCount: return "negative count";
        case ErrorCode::StructureMismatch: return "structure mismatch";
        case ErrorCode::LengthMismatch: return "length mismatch";
        case ErrorCode::TypeMismatch: return "type mismatch";
        case ErrorCode::MissingDefault: return "missing default";
        case ErrorCode::IndexOutOfBounds: return "index out of bounds";
        case ErrorCode::DivisionByZero: return "division by zero";
        case ErrorCode::InvalidName: return "invalid name";
        case ErrorCode::DuplicateName: return "duplicate name";
        case ErrorCode::EmptyFieldSet: return "empty field set";
        case ErrorCode::DuplicateAxisName: return "duplicate axis name";
        case ErrorCode::EmptyAxisList: return "empty axis list";
        case ErrorCode::IncompatibleAxes: return "incompatible axes";
        case ErrorCode::UnknownAxis: return "unknown axis";
        case ErrorCode::MalformedPayload: return "malformed payload";
        case ErrorCode::ShapeMismatch: return "shape mismatch";
        case ErrorCode::NonMonotonicEdges: return "non-monotonic edges";
        case ErrorCode::NaNInput: return "nan input";
        case ErrorCode::SchemaMismatch: return "schema mismatch";
        case ErrorCode::IoError: return "io error";
        case ErrorCode::BadMagic: return "bad magic";
        case ErrorCode::UnsupportedVersion: return "unsupported version";
        case ErrorCode::MalformedHeader: return "malformed header";
        case ErrorCode::UnknownColumn: return "unknown column";
        case ErrorCode::RangeOutOfBounds: return "range out of bounds";
        case ErrorCode::CacheCorrupt: return "cache corrupt";
        case ErrorCode::ProcessorFailed: return "processor failed";
    }
    return "unknown error";
}

}  // namespace colex
