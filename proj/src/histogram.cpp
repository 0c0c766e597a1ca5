#include "colex/histogram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "colex/hex64.hpp"
#include "json.hpp"

namespace colex {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int64_t product(const std::vector<std::int64_t>& dims) {
    std::int64_t p = 1;
    for (auto d : dims) p *= d;
    return p;
}

/// Visits every linear index of a row-major block together with its
/// multi-index (last axis fastest).
template <typename F>
void for_each_index(const std::vector<std::int64_t>& shape, F f) {
    const std::int64_t total = product(shape);
    std::vector<std::int64_t> idx(shape.size(), 0);
    for (std::int64_t lin = 0; lin < total; ++lin) {
        f(lin, idx);
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
}

bool bits_equal(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

void validate_axis(const Axis& axis) {
    if (const auto* r = std::get_if<RegularAxis>(&axis)) {
        if (r->n <= 0)
            fail(ErrorCode::NegativeCount,
                 "axis '" + r->name + "' needs a positive bin count");
        if (!(r->lo < r->hi))
            fail(ErrorCode::NonMonotonicEdges,
                 "axis '" + r->name + "' needs lo < hi");
    } else if (const auto* v = std::get_if<VariableAxis>(&axis)) {
        if (v->edges.size() < 2)
            fail(ErrorCode::NonMonotonicEdges,
                 "axis '" + v->name + "' needs at least two edges");
        for (std::size_t i = 1; i < v->edges.size(); ++i)
            if (!(v->edges[i - 1] < v->edges[i]))
                fail(ErrorCode::NonMonotonicEdges,
                     "axis '" + v->name + "' edges must increase strictly");
    } else {
        const auto& c = std::get<CategoricalAxis>(axis);
        for (std::size_t i = 0; i < c.labels.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (c.labels[j] == c.labels[i])
                    fail(ErrorCode::DuplicateName,
                         "axis '" + c.name + "' label '" + c.labels[i] + "' given twice");
    }
}

}  // namespace

const std::string& axis_name(const Axis& axis) {
    return std::visit([](const auto& a) -> const std::string& { return a.name; }, axis);
}

std::int64_t axis_size(const Axis& axis) {
    if (const auto* r = std::get_if<RegularAxis>(&axis)) return r->n + 2;
    if (const auto* v = std::get_if<VariableAxis>(&axis))
        return static_cast<std::int64_t>(v->edges.size()) - 1 + 2;
    return static_cast<std::int64_t>(std::get<CategoricalAxis>(axis).labels.size());
}

Histogram::Histogram(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) fail(ErrorCode::EmptyAxisList, "a histogram needs at least one axis");
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        validate_axis(axes_[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (axis_name(axes_[j]) == axis_name(axes_[i]))
                fail(ErrorCode::DuplicateAxisName,
                     "axis '" + axis_name(axes_[i]) + "' given twice");
    }
    const auto total = static_cast<std::size_t>(product(shape()));
    sumw_.assign(total, 0.0);
    sumw2_.assign(total, 0.0);
}

std::vector<std::int64_t> Histogram::shape() const {
    std::vector<std::int64_t> s;
    s.reserve(axes_.size());
    for (const auto& a : axes_) s.push_back(axis_size(a));
    return s;
}

std::vector<std::int64_t> Histogram::strides() const {
    auto s = shape();
    std::vector<std::int64_t> st(s.size());
    std::int64_t acc = 1;
    for (std::size_t k = s.size(); k-- > 0;) {
        st[k] = acc;
        acc *= s[k];
    }
    return st;
}

void Histogram::grow_categorical(std::size_t axis_pos,
                                 const std::vector<std::string>& new_labels) {
    if (new_labels.empty()) return;
    auto& cat = std::get<CategoricalAxis>(axes_[axis_pos]);
    const auto old_shape = shape();
    cat.labels.insert(cat.labels.end(), new_labels.begin(), new_labels.end());
    const auto new_shape = shape();

    const auto new_strides = strides();
    std::vector<double> sumw(static_cast<std::size_t>(product(new_shape)), 0.0);
    std::vector<double> sumw2(sumw.size(), 0.0);
    for_each_index(old_shape, [&](std::int64_t lin, const std::vector<std::int64_t>& idx) {
        std::int64_t out = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) out += idx[k] * new_strides[k];
        sumw[out] = sumw_[lin];
        sumw2[out] = sumw2_[lin];
    });
    sumw_ = std::move(sumw);
    sumw2_ = std::move(sumw2);
}

namespace {

/// Slot for one numeric coordinate, flow included: 0 = underflow,
/// 1..n = bins, n+1 = overflow. Kept in one place so the array fill and any
/// scalar re-derivation agree exactly.
std::int64_t numeric_slot(const Axis& axis, double x) {
    if (const auto* r = std::get_if<RegularAxis>(&axis)) {
        if (std::isnan(x)) return r->n + 1;
        if (x < r->lo) return 0;
        if (x >= r->hi) return r->n + 1;
        auto bin = static_cast<std::int64_t>(
            std::floor((x - r->lo) * static_cast<double>(r->n) / (r->hi - r->lo)));
        bin = std::clamp<std::int64_t>(bin, 0, r->n - 1);
        return bin + 1;
    }
    const auto& v = std::get<VariableAxis>(axis);
    const auto n = static_cast<std::int64_t>(v.edges.size()) - 1;
    if (std::isnan(x)) return n + 1;
    if (x < v.edges.front()) return 0;
    if (x >= v.edges.back()) return n + 1;
    auto it = std::upper_bound(v.edges.begin(), v.edges.end(), x);
    return (it - v.edges.begin() - 1) + 1;
}

}  // namespace

void Histogram::fill(const std::vector<Coord>& coords, const std::optional<FlatArray>& weight) {
    if (coords.size() != axes_.size())
        fail(ErrorCode::LengthMismatch,
             "got " + std::to_string(coords.size()) + " coordinate arrays for " +
                 std::to_string(axes_.size()) + " axes");

    std::int64_t n = -1;
    auto note_len = [&](std::int64_t len, const char* what) {
        if (n == -1) n = len;
        if (len != n)
            fail(ErrorCode::LengthMismatch, std::string(what) + " has " + std::to_string(len) +
                                                " entries, expected " + std::to_string(n));
    };
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const bool categorical = std::holds_alternative<CategoricalAxis>(axes_[k]);
        if (const auto* f = std::get_if<FlatArray>(&coords[k])) {
            if (categorical)
                fail(ErrorCode::TypeMismatch,
                     "axis '" + axis_name(axes_[k]) + "' takes string labels");
            if (f->dtype() != Dtype::F64)
                fail(ErrorCode::TypeMismatch,
                     "axis '" + axis_name(axes_[k]) + "' takes f64 coordinates");
            note_len(f->size(), axis_name(axes_[k]).c_str());
        } else {
            if (!categorical)
                fail(ErrorCode::TypeMismatch,
                     "axis '" + axis_name(axes_[k]) + "' takes numeric coordinates");
            note_len(static_cast<std::int64_t>(std::get<std::vector<std::string>>(coords[k]).size()),
                     axis_name(axes_[k]).c_str());
        }
    }
    if (weight) {
        if (weight->dtype() != Dtype::F64)
            fail(ErrorCode::TypeMismatch, "weights must be f64");
        note_len(weight->size(), "weight");
    }
    if (n == -1) n = 0;

    // grow categorical axes first so every label has a slot
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const auto* labels = std::get_if<std::vector<std::string>>(&coords[k]);
        if (!labels) continue;
        auto& cat = std::get<CategoricalAxis>(axes_[k]);
        std::vector<std::string> fresh;
        for (const auto& l : *labels) {
            if (std::find(cat.labels.begin(), cat.labels.end(), l) != cat.labels.end()) continue;
            if (std::find(fresh.begin(), fresh.end(), l) == fresh.end()) fresh.push_back(l);
        }
        grow_categorical(k, fresh);
    }

    const auto st = strides();
    std::span<const double> w;
    if (weight) w = weight->f64();

    struct CoordView {
        std::span<const double> nums;
        const std::vector<std::string>* labels = nullptr;
    };
    std::vector<CoordView> views(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (const auto* f = std::get_if<FlatArray>(&coords[k]))
            views[k].nums = f->f64();
        else
            views[k].labels = &std::get<std::vector<std::string>>(coords[k]);
    }

    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t lin = 0;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            std::int64_t slot;
            if (views[k].labels) {
                const auto& cat = std::get<CategoricalAxis>(axes_[k]);
                slot = std::find(cat.labels.begin(), cat.labels.end(), (*views[k].labels)[i]) -
                       cat.labels.begin();
            } else {
                slot = numeric_slot(axes_[k], views[k].nums[i]);
            }
            lin += slot * st[k];
        }
        const double wi = weight ? w[i] : 1.0;
        sumw_[lin] += wi;
        sumw2_[lin] += wi * wi;
    }
}

Histogram Histogram::merge(const Histogram& a, const Histogram& b) {
    if (a.axes_.size() != b.axes_.size())
        fail(ErrorCode::IncompatibleAxes,
             "histograms have " + std::to_string(a.axes_.size()) + " and " +
                 std::to_string(b.axes_.size()) + " axes");

    std::vector<Axis> out_axes;
    out_axes.reserve(a.axes_.size());
    for (std::size_t k = 0; k < a.axes_.size(); ++k) {
        const Axis& ax = a.axes_[k];
        const Axis& bx = b.axes_[k];
        if (ax.index() != bx.index())
            fail(ErrorCode::IncompatibleAxes,
                 "axis '" + axis_name(ax) + "' has different kinds");
        if (axis_name(ax) != axis_name(bx))
            fail(ErrorCode::IncompatibleAxes,
                 "axis names '" + axis_name(ax) + "' and '" + axis_name(bx) + "' differ");
        if (const auto* ra = std::get_if<RegularAxis>(&ax)) {
            const auto& rb = std::get<RegularAxis>(bx);
            if (ra->n != rb.n || !bits_equal(ra->lo, rb.lo) || !bits_equal(ra->hi, rb.hi))
                fail(ErrorCode::IncompatibleAxes, "axis '" + ra->name + "' edges differ");
            out_axes.push_back(*ra);
        } else if (const auto* va = std::get_if<VariableAxis>(&ax)) {
            const auto& vb = std::get<VariableAxis>(bx);
            bool same = va->edges.size() == vb.edges.size();
            for (std::size_t i = 0; same && i < va->edges.size(); ++i)
                same = bits_equal(va->edges[i], vb.edges[i]);
            if (!same) fail(ErrorCode::IncompatibleAxes, "axis '" + va->name + "' edges differ");
            out_axes.push_back(*va);
        } else {
            const auto& ca = std::get<CategoricalAxis>(ax);
            const auto& cb = std::get<CategoricalAxis>(bx);
            CategoricalAxis merged = ca;
            for (const auto& l : cb.labels)
                if (std::find(merged.labels.begin(), merged.labels.end(), l) ==
                    merged.labels.end())
                    merged.labels.push_back(l);
            out_axes.push_back(std::move(merged));
        }
    }

    Histogram out(std::move(out_axes));
    const auto out_strides = out.strides();

    // a's categorical labels are a prefix of the output's: indices map 1:1
    for_each_index(a.shape(), [&](std::int64_t lin, const std::vector<std::int64_t>& idx) {
        std::int64_t o = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) o += idx[k] * out_strides[k];
        out.sumw_[o] += a.sumw_[lin];
        out.sumw2_[o] += a.sumw2_[lin];
    });

    // b's categorical indices need relabelling into the merged order
    std::vector<std::vector<std::int64_t>> remap(b.axes_.size());
    for (std::size_t k = 0; k < b.axes_.size(); ++k) {
        if (const auto* cb = std::get_if<CategoricalAxis>(&b.axes_[k])) {
            const auto& labels = std::get<CategoricalAxis>(out.axes_[k]).labels;
            for (const auto& l : cb->labels)
                remap[k].push_back(std::find(labels.begin(), labels.end(), l) - labels.begin());
        }
    }
    for_each_index(b.shape(), [&](std::int64_t lin, const std::vector<std::int64_t>& idx) {
        std::int64_t o = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::int64_t slot = remap[k].empty() ? idx[k] : remap[k][idx[k]];
            o += slot * out_strides[k];
        }
        out.sumw_[o] += b.sumw_[lin];
        out.sumw2_[o] += b.sumw2_[lin];
    });
    return out;
}

Histogram::Dense Histogram::values(bool include_flow) const {
    if (include_flow) return {shape(), sumw_, sumw2_};

    std::vector<std::int64_t> out_shape;
    std::vector<bool> numeric;
    for (const auto& a : axes_) {
        const bool has_flow = !std::holds_alternative<CategoricalAxis>(a);
        numeric.push_back(has_flow);
        out_shape.push_back(has_flow ? axis_size(a) - 2 : axis_size(a));
    }
    Dense out{out_shape, std::vector<double>(static_cast<std::size_t>(product(out_shape)), 0.0),
              std::vector<double>(static_cast<std::size_t>(product(out_shape)), 0.0)};

    std::vector<std::int64_t> out_strides(out_shape.size());
    std::int64_t acc = 1;
    for (std::size_t k = out_shape.size(); k-- > 0;) {
        out_strides[k] = acc;
        acc *= out_shape[k];
    }

    for_each_index(shape(), [&](std::int64_t lin, const std::vector<std::int64_t>& idx) {
        std::int64_t o = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::int64_t slot = idx[k];
            if (numeric[k]) {
                if (slot == 0 || slot == out_shape[k] + 1) return;  // flow: dropped
                slot -= 1;
            }
            o += slot * out_strides[k];
        }
        out.sumw[o] = sumw_[lin];
        out.sumw2[o] = sumw2_[lin];
    });
    return out;
}

Histogram Histogram::project(const std::vector<std::string>& keep_axes) const {
    if (keep_axes.empty())
        fail(ErrorCode::EmptyAxisList, "projection must keep at least one axis");
    std::vector<std::size_t> positions;
    std::vector<Axis> out_axes;
    for (const auto& name : keep_axes) {
        auto it = std::find_if(axes_.begin(), axes_.end(),
                               [&](const Axis& a) { return axis_name(a) == name; });
        if (it == axes_.end()) fail(ErrorCode::UnknownAxis, "no axis named '" + name + "'");
        positions.push_back(static_cast<std::size_t>(it - axes_.begin()));
        out_axes.push_back(*it);
    }

    Histogram out(std::move(out_axes));
    const auto out_strides = out.strides();
    for_each_index(shape(), [&](std::int64_t lin, const std::vector<std::int64_t>& idx) {
        std::int64_t o = 0;
        for (std::size_t k = 0; k < positions.size(); ++k)
            o += idx[positions[k]] * out_strides[k];
        out.sumw_[o] += sumw_[lin];
        out.sumw2_[o] += sumw2_[lin];
    });
    return out;
}

double Histogram::total_sumw() const {
    double t = 0.0;
    for (double v : sumw_) t += v;
    return t;
}

bool Histogram::equals(const Histogram& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const Axis& a = axes_[k];
        const Axis& b = other.axes_[k];
        if (a.index() != b.index() || axis_name(a) != axis_name(b)) return false;
        if (const auto* ra = std::get_if<RegularAxis>(&a)) {
            const auto& rb = std::get<RegularAxis>(b);
            if (ra->n != rb.n || !bits_equal(ra->lo, rb.lo) || !bits_equal(ra->hi, rb.hi))
                return false;
        } else if (const auto* va = std::get_if<VariableAxis>(&a)) {
            const auto& vb = std::get<VariableAxis>(b);
            if (va->edges.size() != vb.edges.size()) return false;
            for (std::size_t i = 0; i < va->edges.size(); ++i)
                if (!bits_equal(va->edges[i], vb.edges[i])) return false;
        } else if (std::get<CategoricalAxis>(a).labels != std::get<CategoricalAxis>(b).labels) {
            return false;
        }
    }
    if (sumw_.size() != other.sumw_.size()) return false;
    for (std::size_t i = 0; i < sumw_.size(); ++i)
        if (!bits_equal(sumw_[i], other.sumw_[i]) || !bits_equal(sumw2_[i], other.sumw2_[i]))
            return false;
    return true;
}

// Payload layout (JSON, fixed key order, hex64 = IEEE-754 binary64 bits in
// big-endian hex):
//   {"version":1,
//    "axes":[{"kind":"regular","name":…,"n":…,"lo":"<hex64>","hi":"<hex64>"}
//           |{"kind":"variable","name":…,"edges":["<hex64>",…]}
//           |{"kind":"categorical","name":…,"labels":[…]}],
//    "sumw":["<hex64>",…], "sumw2":["<hex64>",…]}  (row-major, last axis fastest)
std::string Histogram::serialize() const {
    ordered_json j;
    j["version"] = 1;
    j["axes"] = ordered_json::array();
    for (const auto& axis : axes_) {
        ordered_json a;
        if (const auto* r = std::get_if<RegularAxis>(&axis)) {
            a["kind"] = "regular";
            a["name"] = r->name;
            a["n"] = r->n;
            a["lo"] = to_hex64(r->lo);
            a["hi"] = to_hex64(r->hi);
        } else if (const auto* v = std::get_if<VariableAxis>(&axis)) {
            a["kind"] = "variable";
            a["name"] = v->name;
            a["edges"] = ordered_json::array();
            for (double e : v->edges) a["edges"].push_back(to_hex64(e));
        } else {
            const auto& c = std::get<CategoricalAxis>(axis);
            a["kind"] = "categorical";
            a["name"] = c.name;
            a["labels"] = c.labels;
        }
        j["axes"].push_back(std::move(a));
    }
    auto dump_counts = [](const std::vector<double>& v) {
        ordered_json arr = ordered_json::array();
        for (double x : v) arr.push_back(to_hex64(x));
        return arr;
    };
    j["sumw"] = dump_counts(sumw_);
    j["sumw2"] = dump_counts(sumw2_);
    return j.dump();
}

namespace {

[[noreturn]] void bad_payload(const std::string& what) {
    fail(ErrorCode::MalformedPayload, "histogram payload: " + what);
}

const ordered_json& need(const ordered_json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) bad_payload(where + ": missing '" + key + "'");
    return *it;
}

std::vector<double> parse_hex_array(const ordered_json& arr, const std::string& where) {
    if (!arr.is_array()) bad_payload(where + " must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string())
            bad_payload(where + "[" + std::to_string(i) + "] must be a hex64 string");
        try {
            out.push_back(from_hex64(arr[i].get<std::string>()));
        } catch (const Error&) {
            bad_payload(where + "[" + std::to_string(i) + "] is not a hex64 value");
        }
    }
    return out;
}

}  // namespace

Histogram Histogram::deserialize(std::string_view payload) {
    ordered_json j = ordered_json::parse(payload, nullptr, false);
    if (j.is_discarded()) bad_payload("not valid JSON");
    if (!j.is_object()) bad_payload("top level must be an object");
    const auto& version = need(j, "version", "top level");
    if (!version.is_number_integer() || version.get<std::int64_t>() != 1)
        bad_payload("unsupported version");

    const auto& jaxes = need(j, "axes", "top level");
    if (!jaxes.is_array()) bad_payload("'axes' must be an array");

    std::vector<Axis> axes;
    for (std::size_t k = 0; k < jaxes.size(); ++k) {
        const auto& a = jaxes[k];
        const std::string where = "axes[" + std::to_string(k) + "]";
        if (!a.is_object()) bad_payload(where + " must be an object");
        const auto& kind = need(a, "kind", where);
        const auto& name = need(a, "name", where);
        if (!kind.is_string() || !name.is_string())
            bad_payload(where + ": 'kind' and 'name' must be strings");
        if (kind == "regular") {
            const auto& n = need(a, "n", where);
            const auto& lo = need(a, "lo", where);
            const auto& hi = need(a, "hi", where);
            if (!n.is_number_integer() || !lo.is_string() || !hi.is_string())
                bad_payload(where + ": bad regular axis fields");
            try {
                axes.push_back(RegularAxis{name.get<std::string>(), n.get<std::int64_t>(),
                                           from_hex64(lo.get<std::string>()),
                                           from_hex64(hi.get<std::string>())});
            } catch (const Error&) {
                bad_payload(where + ": lo/hi are not hex64 values");
            }
        } else if (kind == "variable") {
            axes.push_back(VariableAxis{name.get<std::string>(),
                                        parse_hex_array(need(a, "edges", where),
                                                        where + ".edges")});
        } else if (kind == "categorical") {
            const auto& labels = need(a, "labels", where);
            if (!labels.is_array()) bad_payload(where + ".labels must be an array");
            std::vector<std::string> ls;
            for (const auto& l : labels) {
                if (!l.is_string()) bad_payload(where + ".labels entries must be strings");
                ls.push_back(l.get<std::string>());
            }
            axes.push_back(CategoricalAxis{name.get<std::string>(), std::move(ls)});
        } else {
            bad_payload(where + ": unknown kind '" + kind.get<std::string>() + "'");
        }
    }

    Histogram out{[&] {
        try {
            return Histogram(std::move(axes));
        } catch (const Error& e) {
            bad_payload(std::string("bad axes: ") + e.what());
        }
    }()};

    auto sumw = parse_hex_array(need(j, "sumw", "top level"), "sumw");
    auto sumw2 = parse_hex_array(need(j, "sumw2", "top level"), "sumw2");
    if (sumw.size() != out.sumw_.size())
        bad_payload("sumw has " + std::to_string(sumw.size()) + " entries, axes imply " +
                    std::to_string(out.sumw_.size()));
    if (sumw2.size() != sumw.size()) bad_payload("sumw2 length differs from sumw");
    out.sumw_ = std::move(sumw);
    out.sumw2_ = std::move(sumw2);
    return out;
}

}  // namespace colex
