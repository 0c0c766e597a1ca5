#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "colex/error.hpp"

namespace colex {

enum class Dtype : std::uint8_t { F64 = 0, I64 = 1, Bool = 2 };

std::string_view to_string(Dtype dtype);

/// Immutable contiguous numeric column. Copies share the underlying storage,
/// so passing arrays around (and caching them) is cheap and thread-safe.
///
/// Booleans are stored as one u8 per element (0/1), matching the on-disk
/// encoding exactly.
class FlatArray {
public:
    FlatArray();  // empty f64

    static FlatArray of_f64(std::vector<double> values);
    static FlatArray of_i64(std::vector<std::int64_t> values);
    static FlatArray of_bool(std::vector<std::uint8_t> values);

    Dtype dtype() const noexcept;
    std::int64_t size() const noexcept;

    // Typed element access; throws TypeMismatch on the wrong dtype.
    std::span<const double> f64() const;
    std::span<const std::int64_t> i64() const;
    std::span<const std::uint8_t> booleans() const;

    /// Bitwise equality (dtype, length, and every element; float64 compared
    /// by bit pattern, so NaNs with equal payloads compare equal).
    bool equals(const FlatArray& other) const;

private:
    using Storage =
        std::variant<std::vector<double>, std::vector<std::int64_t>, std::vector<std::uint8_t>>;

    explicit FlatArray(std::shared_ptr<const Storage> storage);

    std::shared_ptr<const Storage> storage_;
};

/// One level of variable-length nesting: sublist i of the column is
/// content[offsets[i] .. offsets[i+1]). Offsets are validated on
/// construction and never change afterwards.
class JaggedArray {
public:
    JaggedArray(std::vector<std::int64_t> offsets, FlatArray content);

    /// Builds offsets as the prefix sums of `counts` (i64). The content is
    /// adopted as-is, no copy. Throws NegativeCount / CountMismatch.
    static JaggedArray from_counts(const FlatArray& counts, FlatArray content);

    std::int64_t size() const noexcept;  // number of events (sublists)
    std::span<const std::int64_t> offsets() const noexcept;
    const FlatArray& content() const noexcept { return content_; }
    Dtype dtype() const noexcept { return content_.dtype(); }

    std::int64_t count(std::int64_t event) const;
    bool same_structure(const JaggedArray& other) const;

    /// New array over the same offsets (shared, not copied). The content
    /// length must match; used by kernels that preserve structure.
    JaggedArray with_content(FlatArray content) const;

    bool equals(const JaggedArray& other) const;

private:
    struct adopt_offsets_t {};
    JaggedArray(adopt_offsets_t, std::shared_ptr<const std::vector<std::int64_t>> offsets,
                FlatArray content);

    std::shared_ptr<const std::vector<std::int64_t>> offsets_;
    FlatArray content_;
};

using Column = std::variant<FlatArray, JaggedArray>;

std::int64_t column_events(const Column& col);
Dtype column_dtype(const Column& col);
bool column_equals(const Column& a, const Column& b);

/// Typed scalar operand for broadcasting.
class Scalar {
public:
    static Scalar of_f64(double v) { return Scalar(v); }
    static Scalar of_i64(std::int64_t v) { return Scalar(v); }
    static Scalar of_bool(bool v) { return Scalar(v); }

    Dtype dtype() const noexcept;
    double f64() const;
    std::int64_t i64() const;
    bool boolean() const;

private:
    explicit Scalar(double v) : value_(v) {}
    explicit Scalar(std::int64_t v) : value_(v) {}
    explicit Scalar(bool v) : value_(v) {}

    std::variant<double, std::int64_t, bool> value_;
};

enum class BinaryOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, And, Or };
enum class UnaryOp { Neg, Abs, Sqrt, Cos, Cosh };
enum class ReduceKind { Sum, Count, Max, Min, Any, All };

std::string_view to_string(BinaryOp op);

// --- elementwise with broadcasting -----------------------------------------
//
// Shapes combine per these rules (errors otherwise):
//   jagged (x) jagged  -> identical offsets required        (StructureMismatch)
//   jagged (x) flat    -> flat length == n_events, value i replicated
//                         across sublist i                   (LengthMismatch)
//   anything (x) scalar-> scalar replicated
//   flat (x) flat      -> equal lengths                      (LengthMismatch)
//
// Both operands must share one dtype: Add/Sub/Mul/Div on f64/i64 (i64 division
// by zero throws DivisionByZero; f64 follows IEEE-754), Lt/Le/Gt/Ge on
// f64/i64, Eq on any dtype, And/Or on bool. Comparisons yield bool.

FlatArray elementwise(BinaryOp op, const FlatArray& lhs, const FlatArray& rhs);
FlatArray elementwise(BinaryOp op, const FlatArray& lhs, const Scalar& rhs);
FlatArray elementwise(BinaryOp op, const Scalar& lhs, const FlatArray& rhs);
JaggedArray elementwise(BinaryOp op, const JaggedArray& lhs, const JaggedArray& rhs);
JaggedArray elementwise(BinaryOp op, const JaggedArray& lhs, const FlatArray& rhs);
JaggedArray elementwise(BinaryOp op, const FlatArray& lhs, const JaggedArray& rhs);
JaggedArray elementwise(BinaryOp op, const JaggedArray& lhs, const Scalar& rhs);
JaggedArray elementwise(BinaryOp op, const Scalar& lhs, const JaggedArray& rhs);

FlatArray unary(UnaryOp op, const FlatArray& x);
JaggedArray unary(UnaryOp op, const JaggedArray& x);

/// Materializes the jagged (x) flat broadcast: value i of `flat` repeated
/// count(i) times, with `structure`'s offsets.
JaggedArray broadcast_to_jagged(const FlatArray& flat, const JaggedArray& structure);

// --- reductions and selections ----------------------------------------------

/// Per-event reduction over each sublist, left to right. Empty sublists give
/// sum->0, count->0, any->false, all->true; Max/Min need `empty_default`
/// when an empty sublist occurs (MissingDefault otherwise).
FlatArray reduce(ReduceKind kind, const JaggedArray& j,
                 std::optional<Scalar> empty_default = std::nullopt);

/// Keeps elements whose mask entry is true; offsets recomputed.
JaggedArray compress_inner(const JaggedArray& j, const JaggedArray& mask);

/// Keeps rows (flat) or whole sublists (jagged) where mask is true.
FlatArray select_events(const FlatArray& x, const FlatArray& mask);
JaggedArray select_events(const JaggedArray& x, const FlatArray& mask);

FlatArray flatten(const JaggedArray& j);

/// All unordered element pairs per event: for k elements the k*(k-1)/2 index
/// pairs (i, j) with i < j in lexicographic order. Indices are local to the
/// sublist; both outputs share one offsets sequence.
struct PairIndices {
    JaggedArray left;
    JaggedArray right;
};
PairIndices distinct_pairs(const JaggedArray& j);

/// result sublist i holds j's sublist-i elements at the (sublist-local)
/// indices in idx; the result takes idx's offsets.
JaggedArray gather_inner(const JaggedArray& j, const JaggedArray& idx);

std::int64_t count_true(const FlatArray& mask);

}  // namespace colex
