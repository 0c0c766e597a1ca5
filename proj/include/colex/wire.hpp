#pragma once

// Little-endian element codecs shared by the file format and the column
// cache, so both agree byte for byte.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "colex/array.hpp"
#include "colex/error.hpp"

namespace colex::wire {

inline std::int64_t elem_size(Dtype dt) { return dt == Dtype::Bool ? 1 : 8; }

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline void append_elements(std::string& out, const FlatArray& a, std::int64_t from,
                            std::int64_t to) {
    switch (a.dtype()) {
        case Dtype::F64:
            for (std::int64_t i = from; i < to; ++i)
                put_u64(out, std::bit_cast<std::uint64_t>(a.f64()[i]));
            break;
        case Dtype::I64:
            for (std::int64_t i = from; i < to; ++i)
                put_u64(out, static_cast<std::uint64_t>(a.i64()[i]));
            break;
        case Dtype::Bool:
            for (std::int64_t i = from; i < to; ++i)
                out.push_back(a.booleans()[i] ? '\x01' : '\x00');
            break;
    }
}

inline FlatArray decode_elements(Dtype dt, const std::uint8_t* bytes, std::int64_t n) {
    switch (dt) {
        case Dtype::F64: {
            std::vector<double> v(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i)
                v[static_cast<std::size_t>(i)] = std::bit_cast<double>(get_u64(bytes + 8 * i));
            return FlatArray::of_f64(std::move(v));
        }
        case Dtype::I64: {
            std::vector<std::int64_t> v(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i)
                v[static_cast<std::size_t>(i)] =
                    static_cast<std::int64_t>(get_u64(bytes + 8 * i));
            return FlatArray::of_i64(std::move(v));
        }
        case Dtype::Bool: {
            std::vector<std::uint8_t> v(bytes, bytes + n);
            for (auto& b : v) b = b ? 1 : 0;
            return FlatArray::of_bool(std::move(v));
        }
    }
    fail(ErrorCode::TypeMismatch, "unreachable dtype");
}

}  // namespace colex::wire
