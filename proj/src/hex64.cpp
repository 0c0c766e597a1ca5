#include "colex/hex64.hpp"

#include <bit>
#include <cstdint>

#include "colex/error.hpp"

namespace colex {

std::string to_hex64(double value) {
    static const char digits[] = "0123456789abcdef";
    auto bits = std::bit_cast<std::uint64_t>(value);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[bits & 0xf];
        bits >>= 4;
    }
    return out;
}

double from_hex64(std::string_view text) {
    if (text.size() != 16)
        fail(ErrorCode::MalformedPayload,
             "hex64 value must be 16 hex digits, got \"" + std::string(text) + "\"");
    std::uint64_t bits = 0;
    for (char c : text) {
        std::uint64_t nibble;
        if (c >= '0' && c <= '9')
            nibble = static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            nibble = static_cast<std::uint64_t>(c - 'a') + 10;
        else if (c >= 'A' && c <= 'F')
            nibble = static_cast<std::uint64_t>(c - 'A') + 10;
        else
            fail(ErrorCode::MalformedPayload,
                 "invalid hex digit in hex64 value \"" + std::string(text) + "\"");
        bits = (bits << 4) | nibble;
    }
    return std::bit_cast<double>(bits);
}

}  // namespace colex
