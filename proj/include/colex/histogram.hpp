#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "colex/array.hpp"

namespace colex {

/// Fixed numeric axis with n equal-width bins on [lo, hi).
struct RegularAxis {
    std::string name;
    std::int64_t n;
    double lo;
    double hi;
};

/// Numeric axis over explicit strictly increasing edges (n = edges-1 bins).
struct VariableAxis {
    std::string name;
    std::vector<double> edges;
};

/// String-labelled axis. Grows on fill: unseen labels are appended.
struct CategoricalAxis {
    std::string name;
    std::vector<std::string> labels;
};

using Axis = std::variant<RegularAxis, VariableAxis, CategoricalAxis>;

const std::string& axis_name(const Axis& axis);

/// Storage slots along one axis. Numeric axes carry two extra flow slots
/// (underflow first, overflow last); categorical axes have none.
std::int64_t axis_size(const Axis& axis);

/// N-dimensional weighted histogram: dense row-major sumw/sumw2 (last axis
/// fastest). Binning is left-closed/right-open, x == hi lands in overflow,
/// NaN lands in overflow. Fill mutates (single writer); everything else is
/// read-only and a filled histogram can be moved freely between threads.
class Histogram {
public:
    /// Per-axis fill coordinates: f64 values for numeric axes, strings for
    /// categorical ones.
    using Coord = std::variant<FlatArray, std::vector<std::string>>;

    struct Dense {
        std::vector<std::int64_t> shape;
        std::vector<double> sumw;
        std::vector<double> sumw2;
    };

    explicit Histogram(std::vector<Axis> axes);

    const std::vector<Axis>& axes() const noexcept { return axes_; }
    const std::vector<double>& sumw() const noexcept { return sumw_; }
    const std::vector<double>& sumw2() const noexcept { return sumw2_; }
    std::vector<std::int64_t> shape() const;

    /// Accumulates one entry per coordinate row, in input order. A missing
    /// weight array means unit weights. Unseen categorical labels grow the
    /// axis; fresh slots start at zero.
    void fill(const std::vector<Coord>& coords,
              const std::optional<FlatArray>& weight = std::nullopt);

    /// Slotwise sum. Numeric axes must match bitwise; categorical labels are
    /// unioned (a's labels, then b's unseen ones in first-seen order).
    static Histogram merge(const Histogram& a, const Histogram& b);

    /// Row-major copy of the counts; include_flow=false drops the flow slots
    /// of every numeric axis.
    Dense values(bool include_flow) const;

    /// Sums away every axis not named in keep_axes (flow included), leaving
    /// the kept axes in the order given.
    Histogram project(const std::vector<std::string>& keep_axes) const;

    /// Lossless textual payload; see format notes in the implementation.
    std::string serialize() const;
    static Histogram deserialize(std::string_view payload);

    /// Bitwise comparison of axes, labels, and both count arrays.
    bool equals(const Histogram& other) const;

    double total_sumw() const;  // includes flow

private:
    std::vector<Axis> axes_;
    std::vector<double> sumw_;
    std::vector<double> sumw2_;

    std::vector<std::int64_t> strides() const;
    void grow_categorical(std::size_t axis_pos, const std::vector<std::string>& new_labels);
};

}  // namespace colex
