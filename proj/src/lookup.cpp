#include "colex/lookup.hpp"

#include <algorithm>
#include <cmath>

#include "colex/hex64.hpp"
#include "json.hpp"

namespace colex {

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

BinnedLookup::BinnedLookup(std::vector<LookupDim> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
    if (dims_.empty()) fail(ErrorCode::ShapeMismatch, "a lookup needs at least one dimension");
    std::int64_t expect = 1;
    for (const auto& d : dims_) {
        if (d.edges.size() < 2)
            fail(ErrorCode::NonMonotonicEdges,
                 "dim '" + d.name + "' needs at least two edges");
        for (std::size_t i = 1; i < d.edges.size(); ++i)
            if (!(d.edges[i - 1] < d.edges[i]))
                fail(ErrorCode::NonMonotonicEdges,
                     "dim '" + d.name + "' edges must increase strictly");
        expect *= static_cast<std::int64_t>(d.edges.size()) - 1;
    }
    if (static_cast<std::int64_t>(values_.size()) != expect)
        fail(ErrorCode::ShapeMismatch,
             "got " + std::to_string(values_.size()) + " values for " + std::to_string(expect) +
                 " bins");

    strides_.assign(dims_.size(), 1);
    std::int64_t acc = 1;
    for (std::size_t k = dims_.size(); k-- > 0;) {
        strides_[k] = acc;
        acc *= static_cast<std::int64_t>(dims_[k].edges.size()) - 1;
    }
}

double BinnedLookup::eval_one(const std::vector<std::span<const double>>& cols,
                              std::size_t i) const {
    std::int64_t lin = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto& edges = dims_[d].edges;
        const double x = cols[d][i];
        if (std::isnan(x))
            fail(ErrorCode::NaNInput,
                 "dim '" + dims_[d].name + "' position " + std::to_string(i));
        const auto n_bins = static_cast<std::int64_t>(edges.size()) - 1;
        std::int64_t bin;
        if (x < edges.front()) {
            bin = 0;  // clamp low
        } else if (x >= edges.back()) {
            bin = n_bins - 1;  // clamp high
        } else {
            bin = std::upper_bound(edges.begin(), edges.end(), x) - edges.begin() - 1;
        }
        lin += bin * strides_[d];
    }
    return values_[lin];
}

FlatArray BinnedLookup::eval(const std::vector<FlatArray>& points) const {
    if (points.size() != dims_.size())
        fail(ErrorCode::StructureMismatch,
             "got " + std::to_string(points.size()) + " point arrays for " +
                 std::to_string(dims_.size()) + " dims");
    std::vector<std::span<const double>> cols;
    cols.reserve(points.size());
    for (std::size_t d = 0; d < points.size(); ++d) {
        if (points[d].size() != points[0].size())
            fail(ErrorCode::StructureMismatch,
                 "dim '" + dims_[d].name + "' has " + std::to_string(points[d].size()) +
                     " points, expected " + std::to_string(points[0].size()));
        cols.push_back(points[d].f64());
    }
    const auto n = static_cast<std::size_t>(points[0].size());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = eval_one(cols, i);
    return FlatArray::of_f64(std::move(out));
}

JaggedArray BinnedLookup::eval(const std::vector<JaggedArray>& points) const {
    if (points.size() != dims_.size())
        fail(ErrorCode::StructureMismatch,
             "got " + std::to_string(points.size()) + " point arrays for " +
                 std::to_string(dims_.size()) + " dims");
    std::vector<FlatArray> contents;
    contents.reserve(points.size());
    for (std::size_t d = 0; d < points.size(); ++d) {
        if (!points[d].same_structure(points[0]))
            fail(ErrorCode::StructureMismatch,
                 "dim '" + dims_[d].name + "' offsets differ from dim '" + dims_[0].name + "'");
        contents.push_back(points[d].content());
    }
    return points[0].with_content(eval(contents));
}

// {"dims":[{"name":…,"edges":["<hex64>",…]},…],"values":["<hex64>",…]}
std::string BinnedLookup::serialize() const {
    ordered_json j;
    j["dims"] = ordered_json::array();
    for (const auto& d : dims_) {
        ordered_json jd;
        jd["name"] = d.name;
        jd["edges"] = ordered_json::array();
        for (double e : d.edges) jd["edges"].push_back(to_hex64(e));
        j["dims"].push_back(std::move(jd));
    }
    j["values"] = ordered_json::array();
    for (double v : values_) j["values"].push_back(to_hex64(v));
    return j.dump();
}

namespace {

[[noreturn]] void bad_lookup(const std::string& what) {
    fail(ErrorCode::MalformedPayload, "lookup payload: " + what);
}

std::vector<double> parse_hex_array(const ordered_json& arr, const std::string& where) {
    if (!arr.is_array()) bad_lookup(where + " must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string())
            bad_lookup(where + "[" + std::to_string(i) + "] must be a hex64 string");
        try {
            out.push_back(from_hex64(arr[i].get<std::string>()));
        } catch (const Error&) {
            bad_lookup(where + "[" + std::to_string(i) + "] is not a hex64 value");
        }
    }
    return out;
}

}  // namespace

BinnedLookup BinnedLookup::deserialize(std::string_view payload) {
    ordered_json j = ordered_json::parse(payload, nullptr, false);
    if (j.is_discarded()) bad_lookup("not valid JSON");
    if (!j.is_object() || !j.contains("dims") || !j.contains("values"))
        bad_lookup("needs 'dims' and 'values'");
    if (!j["dims"].is_array()) bad_lookup("'dims' must be an array");

    std::vector<LookupDim> dims;
    for (std::size_t k = 0; k < j["dims"].size(); ++k) {
        const auto& jd = j["dims"][k];
        const std::string where = "dims[" + std::to_string(k) + "]";
        if (!jd.is_object() || !jd.contains("name") || !jd.contains("edges") ||
            !jd["name"].is_string())
            bad_lookup(where + " needs a string 'name' and 'edges'");
        dims.push_back(LookupDim{jd["name"].get<std::string>(),
                                 parse_hex_array(jd["edges"], where + ".edges")});
    }
    auto values = parse_hex_array(j["values"], "values");
    try {
        return BinnedLookup(std::move(dims), std::move(values));
    } catch (const Error& e) {
        bad_lookup(e.what());
    }
}

}  // namespace colex
