#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "colex/array.hpp"

namespace colex {

struct LookupDim {
    std::string name;
    std::vector<double> edges;  // strictly increasing, >= 2 entries
};

/// Piecewise-constant correction table: a dense row-major grid of values
/// over binned parameter dimensions. Evaluation bins each point with
/// left-closed/right-open intervals; out-of-range points clamp to the edge
/// bins (corrections are measured on finite ranges, so the boundary value
/// extends outward). NaN input is an error — a silent clamp would hide it.
/// Immutable after construction; evaluation is pure.
class BinnedLookup {
public:
    BinnedLookup(std::vector<LookupDim> dims, std::vector<double> values);

    const std::vector<LookupDim>& dims() const noexcept { return dims_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// One flat array per dimension, all the same length.
    FlatArray eval(const std::vector<FlatArray>& points) const;
    /// One jagged array per dimension, all with the same offsets; the output
    /// reuses the first input's offsets.
    JaggedArray eval(const std::vector<JaggedArray>& points) const;

    std::string serialize() const;
    static BinnedLookup deserialize(std::string_view payload);

private:
    double eval_one(const std::vector<std::span<const double>>& cols, std::size_t i) const;

    std::vector<LookupDim> dims_;
    std::vector<double> values_;
    std::vector<std::int64_t> strides_;
};

}  // namespace colex
