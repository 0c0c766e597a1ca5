#include "colex/array.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

namespace colex {

std::string_view to_string(Dtype dtype) {
    switch (dtype) {
        case Dtype::F64: return "f64";
        case Dtype::I64: return "i64";
        case Dtype::Bool: return "bool";
    }
    return "?";
}

std::string_view to_string(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "add";
        case BinaryOp::Sub: return "sub";
        case BinaryOp::Mul: return "mul";
        case BinaryOp::Div: return "div";
        case BinaryOp::Lt: return "lt";
        case BinaryOp::Le: return "le";
        case BinaryOp::Gt: return "gt";
        case BinaryOp::Ge: return "ge";
        case BinaryOp::Eq: return "eq";
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
    }
    return "?";
}

// --- FlatArray ----------------------------------------------------------------

FlatArray::FlatArray() : storage_(std::make_shared<const Storage>(std::vector<double>{})) {}

FlatArray::FlatArray(std::shared_ptr<const Storage> storage) : storage_(std::move(storage)) {}

FlatArray FlatArray::of_f64(std::vector<double> values) {
    return FlatArray(std::make_shared<const Storage>(std::move(values)));
}

FlatArray FlatArray::of_i64(std::vector<std::int64_t> values) {
    return FlatArray(std::make_shared<const Storage>(std::move(values)));
}

FlatArray FlatArray::of_bool(std::vector<std::uint8_t> values) {
    return FlatArray(std::make_shared<const Storage>(std::move(values)));
}

Dtype FlatArray::dtype() const noexcept { return static_cast<Dtype>(storage_->index()); }

std::int64_t FlatArray::size() const noexcept {
    return std::visit([](const auto& v) { return static_cast<std::int64_t>(v.size()); },
                      *storage_);
}

std::span<const double> FlatArray::f64() const {
    if (const auto* v = std::get_if<std::vector<double>>(storage_.get()))
        return {v->data(), v->size()};
    fail(ErrorCode::TypeMismatch,
         "expected f64 values, got " + std::string(to_string(dtype())));
}

std::span<const std::int64_t> FlatArray::i64() const {
    if (const auto* v = std::get_if<std::vector<std::int64_t>>(storage_.get()))
        return {v->data(), v->size()};
    fail(ErrorCode::TypeMismatch,
         "expected i64 values, got " + std::string(to_string(dtype())));
}

std::span<const std::uint8_t> FlatArray::booleans() const {
    if (const auto* v = std::get_if<std::vector<std::uint8_t>>(storage_.get()))
        return {v->data(), v->size()};
    fail(ErrorCode::TypeMismatch,
         "expected bool values, got " + std::string(to_string(dtype())));
}

bool FlatArray::equals(const FlatArray& other) const {
    if (dtype() != other.dtype() || size() != other.size()) return false;
    if (storage_ == other.storage_) return true;
    return std::visit(
        [&](const auto& a) {
            using V = std::decay_t<decltype(a)>;
            const auto& b = std::get<V>(*other.storage_);
            // memcmp gives bit-pattern comparison for f64 as well
            return a.empty() ||
                   std::memcmp(a.data(), b.data(), a.size() * sizeof(typename V::value_type)) == 0;
        },
        *storage_);
}

// --- JaggedArray ----------------------------------------------------------------

namespace {

std::shared_ptr<const std::vector<std::int64_t>> checked_offsets(
    std::vector<std::int64_t> offsets, std::int64_t content_len) {
    if (offsets.empty())
        fail(ErrorCode::StructureMismatch, "offsets must hold at least one entry");
    if (offsets.front() != 0) fail(ErrorCode::StructureMismatch, "offsets must start at 0");
    for (std::size_t i = 1; i < offsets.size(); ++i)
        if (offsets[i] < offsets[i - 1])
            fail(ErrorCode::StructureMismatch,
                 "offsets decrease at entry " + std::to_string(i));
    if (offsets.back() != content_len)
        fail(ErrorCode::StructureMismatch,
             "offsets end at " + std::to_string(offsets.back()) + " but content has " +
                 std::to_string(content_len) + " elements");
    return std::make_shared<const std::vector<std::int64_t>>(std::move(offsets));
}

}  // namespace

JaggedArray::JaggedArray(std::vector<std::int64_t> offsets, FlatArray content)
    : offsets_(checked_offsets(std::move(offsets), content.size())),
      content_(std::move(content)) {}

JaggedArray::JaggedArray(adopt_offsets_t, std::shared_ptr<const std::vector<std::int64_t>> offsets,
                         FlatArray content)
    : offsets_(std::move(offsets)), content_(std::move(content)) {}

JaggedArray JaggedArray::from_counts(const FlatArray& counts, FlatArray content) {
    auto c = counts.i64();
    std::vector<std::int64_t> offsets(c.size() + 1);
    offsets[0] = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 0)
            fail(ErrorCode::NegativeCount,
                 "count " + std::to_string(c[i]) + " at event " + std::to_string(i));
        offsets[i + 1] = offsets[i] + c[i];
    }
    if (offsets.back() != content.size())
        fail(ErrorCode::CountMismatch,
             "counts sum to " + std::to_string(offsets.back()) + " but content has " +
                 std::to_string(content.size()) + " elements");
    return JaggedArray(adopt_offsets_t{},
                       std::make_shared<const std::vector<std::int64_t>>(std::move(offsets)),
                       std::move(content));
}

std::int64_t JaggedArray::size() const noexcept {
    return static_cast<std::int64_t>(offsets_->size()) - 1;
}

std::span<const std::int64_t> JaggedArray::offsets() const noexcept {
    return {offsets_->data(), offsets_->size()};
}

std::int64_t JaggedArray::count(std::int64_t event) const {
    return (*offsets_)[event + 1] - (*offsets_)[event];
}

bool JaggedArray::same_structure(const JaggedArray& other) const {
    if (offsets_ == other.offsets_) return true;
    return *offsets_ == *other.offsets_;
}

JaggedArray JaggedArray::with_content(FlatArray content) const {
    if (content.size() != offsets_->back())
        fail(ErrorCode::LengthMismatch,
             "content of " + std::to_string(content.size()) + " elements does not fit offsets (" +
                 std::to_string(offsets_->back()) + ")");
    return JaggedArray(adopt_offsets_t{}, offsets_, std::move(content));
}

bool JaggedArray::equals(const JaggedArray& other) const {
    return same_structure(other) && content_.equals(other.content_);
}

std::int64_t column_events(const Column& col) {
    return std::visit([](const auto& a) { return a.size(); }, col);
}

Dtype column_dtype(const Column& col) {
    return std::visit([](const auto& a) { return a.dtype(); }, col);
}

bool column_equals(const Column& a, const Column& b) {
    if (a.index() != b.index()) return false;
    if (const auto* fa = std::get_if<FlatArray>(&a)) return fa->equals(std::get<FlatArray>(b));
    return std::get<JaggedArray>(a).equals(std::get<JaggedArray>(b));
}

// --- Scalar ----------------------------------------------------------------

Dtype Scalar::dtype() const noexcept {
    switch (value_.index()) {
        case 0: return Dtype::F64;
        case 1: return Dtype::I64;
        default: return Dtype::Bool;
    }
}

double Scalar::f64() const {
    if (const auto* v = std::get_if<double>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "scalar is not f64");
}

std::int64_t Scalar::i64() const {
    if (const auto* v = std::get_if<std::int64_t>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "scalar is not i64");
}

bool Scalar::boolean() const {
    if (const auto* v = std::get_if<bool>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "scalar is not bool");
}

// --- elementwise ----------------------------------------------------------------

namespace {

void check_op_dtype(BinaryOp op, Dtype dt) {
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
            if (dt == Dtype::Bool)
                fail(ErrorCode::TypeMismatch,
                     std::string(to_string(op)) + " requires a numeric dtype");
            return;
        case BinaryOp::Eq:
            return;
        case BinaryOp::And:
        case BinaryOp::Or:
            if (dt != Dtype::Bool)
                fail(ErrorCode::TypeMismatch, std::string(to_string(op)) + " requires bool");
            return;
    }
}

FlatArray make_flat(std::vector<double> v) { return FlatArray::of_f64(std::move(v)); }
FlatArray make_flat(std::vector<std::int64_t> v) { return FlatArray::of_i64(std::move(v)); }
FlatArray make_flat(std::vector<std::uint8_t> v) { return FlatArray::of_bool(std::move(v)); }

template <typename T, typename L, typename R>
FlatArray apply_binary(BinaryOp op, std::int64_t n, L lhs, R rhs) {
    auto arith = [&](auto f) {
        std::vector<T> out(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) out[i] = f(lhs(i), rhs(i));
        return make_flat(std::move(out));
    };
    auto pred = [&](auto f) {
        std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) out[i] = f(lhs(i), rhs(i)) ? 1 : 0;
        return FlatArray::of_bool(std::move(out));
    };
    switch (op) {
        case BinaryOp::Add: return arith([](T a, T b) { return static_cast<T>(a + b); });
        case BinaryOp::Sub: return arith([](T a, T b) { return static_cast<T>(a - b); });
        case BinaryOp::Mul: return arith([](T a, T b) { return static_cast<T>(a * b); });
        case BinaryOp::Div:
            if constexpr (std::is_same_v<T, std::int64_t>) {
                std::vector<std::int64_t> out(static_cast<std::size_t>(n));
                for (std::int64_t i = 0; i < n; ++i) {
                    if (rhs(i) == 0)
                        fail(ErrorCode::DivisionByZero,
                             "integer division by zero at position " + std::to_string(i));
                    out[i] = lhs(i) / rhs(i);
                }
                return FlatArray::of_i64(std::move(out));
            } else {
                // f64 follows IEEE-754: x/0 -> inf/nan
                return arith([](T a, T b) { return static_cast<T>(a / b); });
            }
        case BinaryOp::Lt: return pred([](T a, T b) { return a < b; });
        case BinaryOp::Le: return pred([](T a, T b) { return a <= b; });
        case BinaryOp::Gt: return pred([](T a, T b) { return a > b; });
        case BinaryOp::Ge: return pred([](T a, T b) { return a >= b; });
        case BinaryOp::Eq: return pred([](T a, T b) { return a == b; });
        case BinaryOp::And: return pred([](T a, T b) { return a != T{} && b != T{}; });
        case BinaryOp::Or: return pred([](T a, T b) { return a != T{} || b != T{}; });
    }
    fail(ErrorCode::TypeMismatch, "unknown binary op");
}

template <typename F>
FlatArray dispatch_dtype(Dtype dt, F f) {
    switch (dt) {
        case Dtype::F64: return f(double{});
        case Dtype::I64: return f(std::int64_t{});
        case Dtype::Bool: return f(std::uint8_t{});
    }
    fail(ErrorCode::TypeMismatch, "unknown dtype");
}

template <typename T>
std::span<const T> typed_span(const FlatArray& a) {
    if constexpr (std::is_same_v<T, double>)
        return a.f64();
    else if constexpr (std::is_same_v<T, std::int64_t>)
        return a.i64();
    else
        return a.booleans();
}

template <typename T>
T scalar_value(const Scalar& s) {
    if constexpr (std::is_same_v<T, double>)
        return s.f64();
    else if constexpr (std::is_same_v<T, std::int64_t>)
        return s.i64();
    else
        return s.boolean() ? 1 : 0;
}

void check_same_dtype(Dtype a, Dtype b) {
    if (a != b)
        fail(ErrorCode::TypeMismatch, "mixed operand dtypes " + std::string(to_string(a)) +
                                          " and " + std::string(to_string(b)));
}

}  // namespace

FlatArray elementwise(BinaryOp op, const FlatArray& lhs, const FlatArray& rhs) {
    check_same_dtype(lhs.dtype(), rhs.dtype());
    check_op_dtype(op, lhs.dtype());
    if (lhs.size() != rhs.size())
        fail(ErrorCode::LengthMismatch, "flat operands of length " + std::to_string(lhs.size()) +
                                            " and " + std::to_string(rhs.size()));
    return dispatch_dtype(lhs.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto a = typed_span<T>(lhs);
        auto b = typed_span<T>(rhs);
        return apply_binary<T>(
            op, lhs.size(), [a](std::int64_t i) { return a[i]; },
            [b](std::int64_t i) { return b[i]; });
    });
}

FlatArray elementwise(BinaryOp op, const FlatArray& lhs, const Scalar& rhs) {
    check_same_dtype(lhs.dtype(), rhs.dtype());
    check_op_dtype(op, lhs.dtype());
    return dispatch_dtype(lhs.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto a = typed_span<T>(lhs);
        T s = scalar_value<T>(rhs);
        return apply_binary<T>(
            op, lhs.size(), [a](std::int64_t i) { return a[i]; },
            [s](std::int64_t) { return s; });
    });
}

FlatArray elementwise(BinaryOp op, const Scalar& lhs, const FlatArray& rhs) {
    check_same_dtype(lhs.dtype(), rhs.dtype());
    check_op_dtype(op, rhs.dtype());
    return dispatch_dtype(rhs.dtype(), [&](auto tag) {
        using T = decltype(tag);
        T s = scalar_value<T>(lhs);
        auto b = typed_span<T>(rhs);
        return apply_binary<T>(
            op, rhs.size(), [s](std::int64_t) { return s; },
            [b](std::int64_t i) { return b[i]; });
    });
}

JaggedArray elementwise(BinaryOp op, const JaggedArray& lhs, const JaggedArray& rhs) {
    if (!lhs.same_structure(rhs))
        fail(ErrorCode::StructureMismatch, "jagged operands have different offsets");
    return lhs.with_content(elementwise(op, lhs.content(), rhs.content()));
}

JaggedArray elementwise(BinaryOp op, const JaggedArray& lhs, const FlatArray& rhs) {
    JaggedArray replicated = broadcast_to_jagged(rhs, lhs);
    return lhs.with_content(elementwise(op, lhs.content(), replicated.content()));
}

JaggedArray elementwise(BinaryOp op, const FlatArray& lhs, const JaggedArray& rhs) {
    JaggedArray replicated = broadcast_to_jagged(lhs, rhs);
    return rhs.with_content(elementwise(op, replicated.content(), rhs.content()));
}

JaggedArray elementwise(BinaryOp op, const JaggedArray& lhs, const Scalar& rhs) {
    return lhs.with_content(elementwise(op, lhs.content(), rhs));
}

JaggedArray elementwise(BinaryOp op, const Scalar& lhs, const JaggedArray& rhs) {
    return rhs.with_content(elementwise(op, lhs, rhs.content()));
}

JaggedArray broadcast_to_jagged(const FlatArray& flat, const JaggedArray& structure) {
    if (flat.size() != structure.size())
        fail(ErrorCode::LengthMismatch,
             "flat operand has " + std::to_string(flat.size()) + " entries for " +
                 std::to_string(structure.size()) + " events");
    auto offs = structure.offsets();
    return structure.with_content(dispatch_dtype(flat.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto v = typed_span<T>(flat);
        std::vector<T> out(static_cast<std::size_t>(offs.back()));
        for (std::int64_t e = 0; e < structure.size(); ++e)
            for (std::int64_t k = offs[e]; k < offs[e + 1]; ++k) out[k] = v[e];
        return make_flat(std::move(out));
    }));
}

FlatArray unary(UnaryOp op, const FlatArray& x) {
    if (x.dtype() == Dtype::F64) {
        auto v = x.f64();
        std::vector<double> out(v.begin(), v.end());
        switch (op) {
            case UnaryOp::Neg:
                for (auto& e : out) e = -e;
                break;
            case UnaryOp::Abs:
                for (auto& e : out) e = std::fabs(e);
                break;
            case UnaryOp::Sqrt:
                for (auto& e : out) e = std::sqrt(e);
                break;
            case UnaryOp::Cos:
                for (auto& e : out) e = std::cos(e);
                break;
            case UnaryOp::Cosh:
                for (auto& e : out) e = std::cosh(e);
                break;
        }
        return FlatArray::of_f64(std::move(out));
    }
    if (x.dtype() == Dtype::I64 && (op == UnaryOp::Neg || op == UnaryOp::Abs)) {
        auto v = x.i64();
        std::vector<std::int64_t> out(v.begin(), v.end());
        for (auto& e : out) e = op == UnaryOp::Neg ? -e : (e < 0 ? -e : e);
        return FlatArray::of_i64(std::move(out));
    }
    fail(ErrorCode::TypeMismatch,
         "unary op not defined for dtype " + std::string(to_string(x.dtype())));
}

JaggedArray unary(UnaryOp op, const JaggedArray& x) {
    return x.with_content(unary(op, x.content()));
}

// --- reductions ----------------------------------------------------------------

FlatArray reduce(ReduceKind kind, const JaggedArray& j, std::optional<Scalar> empty_default) {
    auto offs = j.offsets();
    const std::int64_t n = j.size();

    switch (kind) {
        case ReduceKind::Count: {
            std::vector<std::int64_t> out(static_cast<std::size_t>(n));
            for (std::int64_t e = 0; e < n; ++e) out[e] = offs[e + 1] - offs[e];
            return FlatArray::of_i64(std::move(out));
        }
        case ReduceKind::Any:
        case ReduceKind::All: {
            if (j.dtype() != Dtype::Bool)
                fail(ErrorCode::TypeMismatch, "any/all require a bool column");
            auto v = j.content().booleans();
            std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
            for (std::int64_t e = 0; e < n; ++e) {
                bool acc = kind == ReduceKind::All;  // empty: any->false, all->true
                for (std::int64_t k = offs[e]; k < offs[e + 1]; ++k) {
                    if (kind == ReduceKind::Any)
                        acc = acc || v[k] != 0;
                    else
                        acc = acc && v[k] != 0;
                }
                out[e] = acc ? 1 : 0;
            }
            return FlatArray::of_bool(std::move(out));
        }
        case ReduceKind::Sum: {
            if (j.dtype() == Dtype::F64) {
                auto v = j.content().f64();
                std::vector<double> out(static_cast<std::size_t>(n));
                for (std::int64_t e = 0; e < n; ++e) {
                    double acc = 0.0;
                    for (std::int64_t k = offs[e]; k < offs[e + 1]; ++k) acc += v[k];
                    out[e] = acc;
                }
                return FlatArray::of_f64(std::move(out));
            }
            if (j.dtype() == Dtype::I64) {
                auto v = j.content().i64();
                std::vector<std::int64_t> out(static_cast<std::size_t>(n));
                for (std::int64_t e = 0; e < n; ++e) {
                    std::int64_t acc = 0;
                    for (std::int64_t k = offs[e]; k < offs[e + 1]; ++k) acc += v[k];
                    out[e] = acc;
                }
                return FlatArray::of_i64(std::move(out));
            }
            fail(ErrorCode::TypeMismatch, "sum requires a numeric column");
        }
        case ReduceKind::Max:
        case ReduceKind::Min: {
            const bool want_max = kind == ReduceKind::Max;
            if (j.dtype() == Dtype::F64) {
                auto v = j.content().f64();
                std::vector<double> out(static_cast<std::size_t>(n));
                for (std::int64_t e = 0; e < n; ++e) {
                    if (offs[e] == offs[e + 1]) {
                        if (!empty_default)
                            fail(ErrorCode::MissingDefault,
                                 "empty sublist at event " + std::to_string(e) +
                                     " and no default supplied");
                        out[e] = empty_default->f64();
                        continue;
                    }
                    double acc = v[offs[e]];
                    for (std::int64_t k = offs[e] + 1; k < offs[e + 1]; ++k)
                        if (want_max ? v[k] > acc : v[k] < acc) acc = v[k];
                    out[e] = acc;
                }
                return FlatArray::of_f64(std::move(out));
            }
            if (j.dtype() == Dtype::I64) {
                auto v = j.content().i64();
                std::vector<std::int64_t> out(static_cast<std::size_t>(n));
                for (std::int64_t e = 0; e < n; ++e) {
                    if (offs[e] == offs[e + 1]) {
                        if (!empty_default)
                            fail(ErrorCode::MissingDefault,
                                 "empty sublist at event " + std::to_string(e) +
                                     " and no default supplied");
                        out[e] = empty_default->i64();
                        continue;
                    }
                    std::int64_t acc = v[offs[e]];
                    for (std::int64_t k = offs[e] + 1; k < offs[e + 1]; ++k)
                        if (want_max ? v[k] > acc : v[k] < acc) acc = v[k];
                    out[e] = acc;
                }
                return FlatArray::of_i64(std::move(out));
            }
            fail(ErrorCode::TypeMismatch, "max/min require a numeric column");
        }
    }
    fail(ErrorCode::TypeMismatch, "unknown reduction");
}

// --- selections ----------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> filter_by_mask(std::span<const T> v, std::span<const std::uint8_t> keep) {
    std::vector<T> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (keep[i]) out.push_back(v[i]);
    return out;
}

}  // namespace

JaggedArray compress_inner(const JaggedArray& j, const JaggedArray& mask) {
    if (mask.dtype() != Dtype::Bool)
        fail(ErrorCode::TypeMismatch, "compress mask must be bool");
    if (!j.same_structure(mask))
        fail(ErrorCode::StructureMismatch, "mask offsets differ from the array's");
    auto offs = j.offsets();
    auto keep = mask.content().booleans();

    std::vector<std::int64_t> new_offsets(static_cast<std::size_t>(j.size()) + 1);
    new_offsets[0] = 0;
    for (std::int64_t e = 0; e < j.size(); ++e) {
        std::int64_t kept = 0;
        for (std::int64_t k = offs[e]; k < offs[e + 1]; ++k) kept += keep[k] ? 1 : 0;
        new_offsets[e + 1] = new_offsets[e] + kept;
    }

    FlatArray content = dispatch_dtype(j.dtype(), [&](auto tag) {
        using T = decltype(tag);
        return make_flat(filter_by_mask(typed_span<T>(j.content()), keep));
    });
    return JaggedArray(std::move(new_offsets), std::move(content));
}

FlatArray select_events(const FlatArray& x, const FlatArray& mask) {
    if (mask.dtype() != Dtype::Bool)
        fail(ErrorCode::TypeMismatch, "event mask must be bool");
    if (mask.size() != x.size())
        fail(ErrorCode::LengthMismatch, "mask of length " + std::to_string(mask.size()) +
                                            " for " + std::to_string(x.size()) + " events");
    auto keep = mask.booleans();
    return dispatch_dtype(x.dtype(), [&](auto tag) {
        using T = decltype(tag);
        return make_flat(filter_by_mask(typed_span<T>(x), keep));
    });
}

JaggedArray select_events(const JaggedArray& x, const FlatArray& mask) {
    if (mask.dtype() != Dtype::Bool)
        fail(ErrorCode::TypeMismatch, "event mask must be bool");
    if (mask.size() != x.size())
        fail(ErrorCode::LengthMismatch, "mask of length " + std::to_string(mask.size()) +
                                            " for " + std::to_string(x.size()) + " events");
    auto keep = mask.booleans();
    auto offs = x.offsets();

    std::vector<std::int64_t> new_offsets;
    new_offsets.reserve(static_cast<std::size_t>(x.size()) + 1);
    new_offsets.push_back(0);
    for (std::int64_t e = 0; e < x.size(); ++e)
        if (keep[e]) new_offsets.push_back(new_offsets.back() + (offs[e + 1] - offs[e]));

    FlatArray content = dispatch_dtype(x.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto v = typed_span<T>(x.content());
        std::vector<T> out;
        out.reserve(v.size());
        for (std::int64_t e = 0; e < x.size(); ++e)
            if (keep[e])
                for (std::int64_t k = offs[e]; k < offs[e + 1]; ++k) out.push_back(v[k]);
        return make_flat(std::move(out));
    });
    return JaggedArray(std::move(new_offsets), std::move(content));
}

FlatArray flatten(const JaggedArray& j) { return j.content(); }

PairIndices distinct_pairs(const JaggedArray& j) {
    auto offs = j.offsets();
    const std::int64_t n = j.size();

    std::vector<std::int64_t> pair_offsets(static_cast<std::size_t>(n) + 1);
    pair_offsets[0] = 0;
    for (std::int64_t e = 0; e < n; ++e) {
        const std::int64_t k = offs[e + 1] - offs[e];
        pair_offsets[e + 1] = pair_offsets[e] + k * (k - 1) / 2;
    }

    const std::size_t total = static_cast<std::size_t>(pair_offsets.back());
    std::vector<std::int64_t> left(total);
    std::vector<std::int64_t> right(total);
    std::size_t pos = 0;
    for (std::int64_t e = 0; e < n; ++e) {
        const std::int64_t k = offs[e + 1] - offs[e];
        for (std::int64_t i = 0; i < k; ++i)
            for (std::int64_t jj = i + 1; jj < k; ++jj) {
                left[pos] = i;
                right[pos] = jj;
                ++pos;
            }
    }

    JaggedArray left_arr(std::move(pair_offsets), FlatArray::of_i64(std::move(left)));
    JaggedArray right_arr = left_arr.with_content(FlatArray::of_i64(std::move(right)));
    return {std::move(left_arr), std::move(right_arr)};
}

JaggedArray gather_inner(const JaggedArray& j, const JaggedArray& idx) {
    if (idx.dtype() != Dtype::I64)
        fail(ErrorCode::TypeMismatch, "gather indices must be i64");
    if (idx.size() != j.size())
        fail(ErrorCode::LengthMismatch, "index array has " + std::to_string(idx.size()) +
                                            " events, source has " + std::to_string(j.size()));
    auto joffs = j.offsets();
    auto ioffs = idx.offsets();
    auto ids = idx.content().i64();

    return idx.with_content(dispatch_dtype(j.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto v = typed_span<T>(j.content());
        std::vector<T> out(ids.size());
        for (std::int64_t e = 0; e < j.size(); ++e) {
            const std::int64_t avail = joffs[e + 1] - joffs[e];
            for (std::int64_t k = ioffs[e]; k < ioffs[e + 1]; ++k) {
                const std::int64_t local = ids[k];
                if (local < 0 || local >= avail)
                    fail(ErrorCode::IndexOutOfBounds,
                         "event " + std::to_string(e) + ": index " + std::to_string(local) +
                             " out of range for " + std::to_string(avail) + " elements");
                out[k] = v[joffs[e] + local];
            }
        }
        return make_flat(std::move(out));
    }));
}

std::int64_t count_true(const FlatArray& mask) {
    auto v = mask.booleans();
    std::int64_t n = 0;
    for (auto b : v) n += b ? 1 : 0;
    return n;
}

}  // namespace colex
