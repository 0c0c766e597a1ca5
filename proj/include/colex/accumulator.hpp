#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "colex/histogram.hpp"

namespace colex {

/// A reducible value: something with an identity and an associative merge.
/// Processor outputs are accumulators, so any two chunks' results can be
/// combined regardless of which worker produced them.
///
/// Five variants: Counter (f64 sum), IntCounter (i64 sum), Hist, Namespace
/// (ordered name → Accumulator tree, depth ≤ 16), and SetAcc (string-set
/// union). There is deliberately no concatenating accumulator: every merge
/// here is commutative up to float rounding, which keeps executors free to
/// combine partial results in any tree shape.
class Accumulator {
public:
    enum class Kind { Counter, IntCounter, Hist, Namespace, Set };
    using Entry = std::pair<std::string, Accumulator>;

    static Accumulator counter(double value);
    static Accumulator int_counter(std::int64_t value);
    static Accumulator hist(Histogram h);
    static Accumulator set(std::set<std::string> strings);
    static Accumulator group(std::vector<Entry> entries);  // Namespace

    Kind kind() const noexcept;

    double counter_value() const;        // Counter
    std::int64_t int_value() const;      // IntCounter
    const Histogram& histogram() const;  // Hist
    const std::vector<Entry>& entries() const;        // Namespace
    const std::set<std::string>& strings() const;     // SetAcc

    /// Child lookup on a Namespace; throws UnknownColumn when absent.
    const Accumulator& at(std::string_view name) const;
    bool has(std::string_view name) const;

    /// Same shape, neutral contents: zeroed counters, empty set, a zeroed
    /// histogram over the same axes, a namespace of identities.
    static Accumulator identity_of(const Accumulator& a);

    /// Combines two same-shaped accumulators; inputs are left untouched.
    /// Shape divergence reports the offending path (e.g. "out.cutflow").
    static Accumulator merge(const Accumulator& a, const Accumulator& b);

    /// JSON text: Counter → hex64 string, IntCounter → integer, Hist → its
    /// histogram payload, SetAcc → sorted string array, Namespace → object.
    std::string serialize() const;
    static Accumulator deserialize(std::string_view payload);

    bool equals(const Accumulator& other) const;

private:
    using Value = std::variant<double, std::int64_t, Histogram, std::vector<Entry>,
                               std::set<std::string>>;
    explicit Accumulator(Value v) : value_(std::move(v)) {}

    std::int64_t depth() const;

    Value value_;
};

}  // namespace colex
