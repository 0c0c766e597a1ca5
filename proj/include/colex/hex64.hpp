#pragma once

#include <string>
#include <string_view>

namespace colex {

// Lossless float64 text encoding used by every JSON payload in the project:
// the IEEE-754 binary64 bit pattern as 16 lowercase hex digits, big-endian
// (most significant nibble first). 1.0 <-> "3ff0000000000000".
std::string to_hex64(double value);

/// Throws MalformedPayload unless `text` is exactly 16 hex digits.
double from_hex64(std::string_view text);

}  // namespace colex
