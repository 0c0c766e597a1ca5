#include "colex/accumulator.hpp"

#include <algorithm>
#include <bit>

#include "colex/hex64.hpp"
#include "json.hpp"

namespace colex {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::int64_t kMaxDepth = 16;

std::string_view kind_name(Accumulator::Kind k) {
    switch (k) {
        case Accumulator::Kind::Counter: return "counter";
        case Accumulator::Kind::IntCounter: return "int counter";
        case Accumulator::Kind::Hist: return "histogram";
        case Accumulator::Kind::Namespace: return "namespace";
        case Accumulator::Kind::Set: return "set";
    }
    return "?";
}

std::string child_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

}  // namespace

Accumulator Accumulator::counter(double value) { return Accumulator(Value(value)); }
Accumulator Accumulator::int_counter(std::int64_t value) { return Accumulator(Value(value)); }
Accumulator Accumulator::hist(Histogram h) { return Accumulator(Value(std::move(h))); }
Accumulator Accumulator::set(std::set<std::string> strings) {
    return Accumulator(Value(std::move(strings)));
}

Accumulator Accumulator::group(std::vector<Entry> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (entries[j].first == entries[i].first)
                fail(ErrorCode::DuplicateName,
                     "namespace key '" + entries[i].first + "' given twice");
    Accumulator out{Value(std::move(entries))};
    if (out.depth() > kMaxDepth)
        fail(ErrorCode::ShapeMismatch,
             "accumulator nesting deeper than " + std::to_string(kMaxDepth));
    return out;
}

Accumulator::Kind Accumulator::kind() const noexcept {
    return static_cast<Kind>(value_.index());
}

double Accumulator::counter_value() const {
    if (const auto* v = std::get_if<double>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "not a counter");
}

std::int64_t Accumulator::int_value() const {
    if (const auto* v = std::get_if<std::int64_t>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "not an int counter");
}

const Histogram& Accumulator::histogram() const {
    if (const auto* v = std::get_if<Histogram>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "not a histogram");
}

const std::vector<Accumulator::Entry>& Accumulator::entries() const {
    if (const auto* v = std::get_if<std::vector<Entry>>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "not a namespace");
}

const std::set<std::string>& Accumulator::strings() const {
    if (const auto* v = std::get_if<std::set<std::string>>(&value_)) return *v;
    fail(ErrorCode::TypeMismatch, "not a set");
}

const Accumulator& Accumulator::at(std::string_view name) const {
    for (const auto& [k, v] : entries())
        if (k == name) return v;
    fail(ErrorCode::UnknownColumn, "namespace has no entry '" + std::string(name) + "'");
}

bool Accumulator::has(std::string_view name) const {
    const auto& es = entries();
    return std::any_of(es.begin(), es.end(), [&](const auto& e) { return e.first == name; });
}

std::int64_t Accumulator::depth() const {
    if (kind() != Kind::Namespace) return 1;
    std::int64_t deepest = 0;
    for (const auto& [k, v] : std::get<std::vector<Entry>>(value_))
        deepest = std::max(deepest, v.depth());
    return 1 + deepest;
}

Accumulator Accumulator::identity_of(const Accumulator& a) {
    switch (a.kind()) {
        case Kind::Counter: return counter(0.0);
        case Kind::IntCounter: return int_counter(0);
        case Kind::Hist: return hist(Histogram(a.histogram().axes()));
        case Kind::Set: return set({});
        case Kind::Namespace: {
            std::vector<Entry> out;
            for (const auto& [k, v] : a.entries()) out.emplace_back(k, identity_of(v));
            return group(std::move(out));
        }
    }
    fail(ErrorCode::TypeMismatch, "unknown accumulator kind");
}

namespace {

Accumulator merge_at(const Accumulator& a, const Accumulator& b, const std::string& path);

Accumulator merge_namespaces(const Accumulator& a, const Accumulator& b,
                             const std::string& path) {
    // key sets must agree; order follows a
    for (const auto& [k, v] : b.entries())
        if (!a.has(k))
            fail(ErrorCode::ShapeMismatch,
                 "no counterpart for '" + child_path(path, k) + "'");
    std::vector<Accumulator::Entry> out;
    for (const auto& [k, v] : a.entries()) {
        if (!b.has(k))
            fail(ErrorCode::ShapeMismatch,
                 "no counterpart for '" + child_path(path, k) + "'");
        out.emplace_back(k, merge_at(v, b.at(k), child_path(path, k)));
    }
    return Accumulator::group(std::move(out));
}

Accumulator merge_at(const Accumulator& a, const Accumulator& b, const std::string& path) {
    if (a.kind() != b.kind())
        fail(ErrorCode::ShapeMismatch,
             "cannot merge " + std::string(kind_name(a.kind())) + " with " +
                 std::string(kind_name(b.kind())) +
                 (path.empty() ? std::string() : " at '" + path + "'"));
    switch (a.kind()) {
        case Accumulator::Kind::Counter:
            return Accumulator::counter(a.counter_value() + b.counter_value());
        case Accumulator::Kind::IntCounter:
            return Accumulator::int_counter(a.int_value() + b.int_value());
        case Accumulator::Kind::Hist:
            return Accumulator::hist(Histogram::merge(a.histogram(), b.histogram()));
        case Accumulator::Kind::Set: {
            std::set<std::string> u = a.strings();
            u.insert(b.strings().begin(), b.strings().end());
            return Accumulator::set(std::move(u));
        }
        case Accumulator::Kind::Namespace:
            return merge_namespaces(a, b, path);
    }
    fail(ErrorCode::TypeMismatch, "unknown accumulator kind");
}

}  // namespace

Accumulator Accumulator::merge(const Accumulator& a, const Accumulator& b) {
    return merge_at(a, b, "");
}

namespace {

ordered_json acc_to_json(const Accumulator& a) {
    switch (a.kind()) {
        case Accumulator::Kind::Counter: return to_hex64(a.counter_value());
        case Accumulator::Kind::IntCounter: return a.int_value();
        case Accumulator::Kind::Hist: return ordered_json::parse(a.histogram().serialize());
        case Accumulator::Kind::Set: {
            ordered_json arr = ordered_json::array();
            for (const auto& s : a.strings()) arr.push_back(s);  // std::set iterates sorted
            return arr;
        }
        case Accumulator::Kind::Namespace: {
            ordered_json obj = ordered_json::object();
            for (const auto& [k, v] : a.entries()) obj[k] = acc_to_json(v);
            return obj;
        }
    }
    fail(ErrorCode::TypeMismatch, "unknown accumulator kind");
}

[[noreturn]] void bad_acc(const std::string& what) {
    fail(ErrorCode::MalformedPayload, "accumulator payload: " + what);
}

bool looks_like_histogram(const ordered_json& j) {
    return j.contains("version") && j.contains("axes") && j.contains("sumw") &&
           j.contains("sumw2");
}

Accumulator acc_from_json(const ordered_json& j, const std::string& path) {
    if (j.is_string()) {
        try {
            return Accumulator::counter(from_hex64(j.get<std::string>()));
        } catch (const Error&) {
            bad_acc("'" + path + "' is not a hex64 counter");
        }
    }
    if (j.is_number_integer()) return Accumulator::int_counter(j.get<std::int64_t>());
    if (j.is_array()) {
        std::set<std::string> out;
        for (const auto& s : j) {
            if (!s.is_string()) bad_acc("'" + path + "' set entries must be strings");
            out.insert(s.get<std::string>());
        }
        return Accumulator::set(std::move(out));
    }
    if (j.is_object()) {
        // a histogram payload is an object too; its fixed keys identify it
        if (looks_like_histogram(j)) return Accumulator::hist(Histogram::deserialize(j.dump()));
        std::vector<Accumulator::Entry> entries;
        for (const auto& [k, v] : j.items())
            entries.emplace_back(k, acc_from_json(v, child_path(path, k)));
        return Accumulator::group(std::move(entries));
    }
    bad_acc("'" + path + "' has no accumulator form");
}

}  // namespace

std::string Accumulator::serialize() const { return acc_to_json(*this).dump(); }

Accumulator Accumulator::deserialize(std::string_view payload) {
    ordered_json j = ordered_json::parse(payload, nullptr, false);
    if (j.is_discarded()) bad_acc("not valid JSON");
    return acc_from_json(j, "");
}

bool Accumulator::equals(const Accumulator& other) const {
    if (kind() != other.kind()) return false;
    switch (kind()) {
        case Kind::Counter:
            return std::bit_cast<std::uint64_t>(counter_value()) ==
                   std::bit_cast<std::uint64_t>(other.counter_value());
        case Kind::IntCounter: return int_value() == other.int_value();
        case Kind::Hist: return histogram().equals(other.histogram());
        case Kind::Set: return strings() == other.strings();
        case Kind::Namespace: {
            const auto& a = entries();
            const auto& b = other.entries();
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i].first != b[i].first || !a[i].second.equals(b[i].second)) return false;
            return true;
        }
    }
    return false;
}

}  // namespace colex
