#include "colex/format.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "colex/wire.hpp"
#include "json.hpp"

namespace colex {

using wire::append_elements;
using wire::decode_elements;
using wire::elem_size;
using wire::get_u32;
using wire::get_u64;
using wire::put_u32;
using wire::put_u64;

namespace {

constexpr char kMagic[4] = {'C', 'F', 'P', 'K'};
constexpr std::uint32_t kVersion = 1;

std::string_view layout_name(bool jagged) { return jagged ? "jagged" : "flat"; }

Dtype parse_dtype(const std::string& s, const std::string& col) {
    if (s == "f64") return Dtype::F64;
    if (s == "i64") return Dtype::I64;
    if (s == "bool") return Dtype::Bool;
    fail(ErrorCode::MalformedHeader, "column '" + col + "': unknown dtype '" + s + "'");
}

bool valid_column_name(const std::string& s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9') || c == '.'; };
    if (!head(s[0])) return false;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!tail(s[i])) return false;
    return true;
}

std::vector<std::uint8_t> fetch(const RandomAccessFile& f, std::int64_t off, std::int64_t n) {
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(n));
    if (n > 0) f.read_at(off, buf.data(), static_cast<std::size_t>(n));
    return buf;
}

}  // namespace

void write_file(const std::string& path, const std::vector<ColumnSchema>& schema,
                const std::vector<EventTable>& groups) {
    if (schema.empty()) fail(ErrorCode::EmptyFieldSet, "schema has no columns");
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (!valid_column_name(schema[i].name))
            fail(ErrorCode::InvalidName, "bad column name '" + schema[i].name + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (schema[j].name == schema[i].name)
                fail(ErrorCode::DuplicateName, "duplicate column '" + schema[i].name + "'");
    }

    // Every group must present exactly the schema, in order.
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& cols = groups[g].columns();
        const std::string where = "row group " + std::to_string(g);
        if (cols.size() != schema.size())
            fail(ErrorCode::SchemaMismatch,
                 where + ": expected " + std::to_string(schema.size()) + " columns, got " +
                     std::to_string(cols.size()));
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const auto& [name, col] = cols[c];
            if (name != schema[c].name)
                fail(ErrorCode::SchemaMismatch, where + ": column " + std::to_string(c) +
                                                    " is '" + name + "', expected '" +
                                                    schema[c].name + "'");
            bool jagged = std::holds_alternative<JaggedArray>(col);
            if (jagged != schema[c].jagged)
                fail(ErrorCode::SchemaMismatch,
                     where + ": column '" + name + "' is " +
                         std::string(layout_name(jagged)) + ", expected " +
                         std::string(layout_name(schema[c].jagged)));
            if (column_dtype(col) != schema[c].dtype)
                fail(ErrorCode::SchemaMismatch,
                     where + ": column '" + name + "' is " +
                         std::string(to_string(column_dtype(col))) + ", expected " +
                         std::string(to_string(schema[c].dtype)));
        }
    }

    nlohmann::ordered_json header;
    header["columns"] = nlohmann::ordered_json::array();
    for (const auto& cs : schema) {
        nlohmann::ordered_json jc;
        jc["name"] = cs.name;
        jc["dtype"] = std::string(to_string(cs.dtype));
        jc["layout"] = std::string(layout_name(cs.jagged));
        header["columns"].push_back(std::move(jc));
    }
    header["row_groups"] = nlohmann::ordered_json::array();
    for (const auto& g : groups)
        header["row_groups"].push_back({{"n_events", g.n_events()}});
    const std::string header_bytes = header.dump();

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, header_bytes.size());
    out += header_bytes;

    for (const auto& g : groups) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const Column& col = g.columns()[c].second;
            if (const auto* flat = std::get_if<FlatArray>(&col)) {
                append_elements(out, *flat, 0, flat->size());
            } else {
                const auto& jag = std::get<JaggedArray>(col);
                auto offs = jag.offsets();
                for (std::int64_t e = 0; e < jag.size(); ++e) {
                    std::int64_t cnt = offs[e + 1] - offs[e];
                    if (cnt > std::numeric_limits<std::uint32_t>::max())
                        fail(ErrorCode::IoError, "list too long for u32 count");
                    put_u32(out, static_cast<std::uint32_t>(cnt));
                }
                put_u64(out, static_cast<std::uint64_t>(jag.content().size()));
                append_elements(out, jag.content(), 0, jag.content().size());
            }
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f) fail(ErrorCode::IoError, "write failed on '" + path + "'");
}

CfpkReader::CfpkReader(FilePtr file) : file_(std::move(file)) {
    const std::int64_t fsize = file_->size();
    if (fsize < 16) fail(ErrorCode::BadMagic, "file too short for header");
    auto head = fetch(*file_, 0, 16);
    if (std::memcmp(head.data(), kMagic, 4) != 0)
        fail(ErrorCode::BadMagic, "not a CFPK file");
    std::uint32_t version = get_u32(&head[4]);
    if (version != kVersion)
        fail(ErrorCode::UnsupportedVersion,
             "file version " + std::to_string(version) + ", reader supports 1");
    std::uint64_t header_len = get_u64(&head[8]);
    if (header_len > static_cast<std::uint64_t>(fsize) - 16)
        fail(ErrorCode::MalformedHeader, "header length overruns file");
    auto hbytes = fetch(*file_, 16, static_cast<std::int64_t>(header_len));
    header_.assign(hbytes.begin(), hbytes.end());

    nlohmann::json h = nlohmann::json::parse(header_, nullptr, false);
    if (h.is_discarded() || !h.is_object())
        fail(ErrorCode::MalformedHeader, "header is not valid JSON");
    if (!h.contains("columns") || !h["columns"].is_array() || h["columns"].empty())
        fail(ErrorCode::MalformedHeader, "header lacks a columns list");
    if (!h.contains("row_groups") || !h["row_groups"].is_array())
        fail(ErrorCode::MalformedHeader, "header lacks a row_groups list");

    for (const auto& jc : h["columns"]) {
        if (!jc.is_object() || !jc.contains("name") || !jc["name"].is_string() ||
            !jc.contains("dtype") || !jc["dtype"].is_string() || !jc.contains("layout") ||
            !jc["layout"].is_string())
            fail(ErrorCode::MalformedHeader, "malformed column entry");
        ColumnSchema cs;
        cs.name = jc["name"].get<std::string>();
        if (!valid_column_name(cs.name))
            fail(ErrorCode::MalformedHeader, "bad column name '" + cs.name + "'");
        cs.dtype = parse_dtype(jc["dtype"].get<std::string>(), cs.name);
        const std::string layout = jc["layout"].get<std::string>();
        if (layout == "jagged")
            cs.jagged = true;
        else if (layout == "flat")
            cs.jagged = false;
        else
            fail(ErrorCode::MalformedHeader,
                 "column '" + cs.name + "': unknown layout '" + layout + "'");
        for (const auto& prev : schema_)
            if (prev.name == cs.name)
                fail(ErrorCode::MalformedHeader, "duplicate column '" + cs.name + "'");
        schema_.push_back(std::move(cs));
    }

    // Walk the group framing to learn where every column lives. Only the
    // u64 content lengths are read here, never counts or elements.
    std::int64_t pos = 16 + static_cast<std::int64_t>(header_len);
    for (const auto& jg : h["row_groups"]) {
        if (!jg.is_object() || !jg.contains("n_events") ||
            !jg["n_events"].is_number_integer() || jg["n_events"].get<std::int64_t>() < 0)
            fail(ErrorCode::MalformedHeader, "malformed row group entry");
        RowGroupMeta meta;
        meta.n_events = jg["n_events"].get<std::int64_t>();
        meta.byte_offset = pos;

        std::vector<std::int64_t> starts;
        for (const auto& cs : schema_) {
            starts.push_back(pos);
            if (!cs.jagged) {
                pos += meta.n_events * elem_size(cs.dtype);
            } else {
                pos += 4 * meta.n_events;
                if (pos + 8 > fsize)
                    fail(ErrorCode::MalformedHeader, "row group data truncated");
                auto lenb = fetch(*file_, pos, 8);
                pos += 8 + static_cast<std::int64_t>(get_u64(lenb.data())) * elem_size(cs.dtype);
            }
            if (pos > fsize) fail(ErrorCode::MalformedHeader, "row group data truncated");
        }
        col_start_.push_back(std::move(starts));
        groups_.push_back(meta);
        total_ += meta.n_events;
    }
    if (pos != fsize)
        fail(ErrorCode::MalformedHeader, "trailing bytes after last row group");
}

EventTable CfpkReader::read(const std::vector<std::string>& names, std::int64_t start,
                            std::int64_t stop, std::int64_t* payload_bytes) const {
    std::int64_t fetched = 0;
    if (start < 0 || stop < start || stop > total_)
        fail(ErrorCode::RangeOutOfBounds, "range [" + std::to_string(start) + ", " +
                                              std::to_string(stop) + ") outside [0, " +
                                              std::to_string(total_) + ")");
    std::vector<std::size_t> which;
    for (const auto& name : names) {
        std::size_t c = 0;
        for (; c < schema_.size(); ++c)
            if (schema_[c].name == name) break;
        if (c == schema_.size())
            fail(ErrorCode::UnknownColumn, "no column '" + name + "' in file");
        which.push_back(c);
    }

    // Per requested column, gather the slices group by group.
    std::vector<EventTable::NamedColumn> cols;
    for (std::size_t k = 0; k < names.size(); ++k) {
        const ColumnSchema& cs = schema_[which[k]];
        const std::int64_t esz = elem_size(cs.dtype);

        std::vector<std::uint8_t> elem_bytes;
        std::vector<std::int64_t> counts;
        std::int64_t n_elems = 0;

        std::int64_t gstart = 0;  // global index of the group's first event
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            const std::int64_t gn = groups_[g].n_events;
            const std::int64_t lo = std::max<std::int64_t>(start - gstart, 0);
            const std::int64_t hi = std::min<std::int64_t>(stop - gstart, gn);
            gstart += gn;
            if (lo >= hi) continue;
            const std::int64_t base = col_start_[g][which[k]];

            if (!cs.jagged) {
                auto bytes = fetch(*file_, base + lo * esz, (hi - lo) * esz);
                fetched += (hi - lo) * esz;
                elem_bytes.insert(elem_bytes.end(), bytes.begin(), bytes.end());
                n_elems += hi - lo;
            } else {
                // Counts for [0, hi) give both the slice's counts and the
                // number of content elements to skip before it.
                auto cbytes = fetch(*file_, base, hi * 4);
                std::int64_t before = 0;
                for (std::int64_t e = 0; e < lo; ++e) before += get_u32(&cbytes[4 * e]);
                std::int64_t inner = 0;
                for (std::int64_t e = lo; e < hi; ++e) {
                    std::int64_t cnt = get_u32(&cbytes[4 * e]);
                    counts.push_back(cnt);
                    inner += cnt;
                }
                const std::int64_t content0 = base + 4 * gn + 8;
                auto bytes = fetch(*file_, content0 + before * esz, inner * esz);
                fetched += hi * 4 + inner * esz;
                elem_bytes.insert(elem_bytes.end(), bytes.begin(), bytes.end());
                n_elems += inner;
            }
        }

        FlatArray elems = decode_elements(cs.dtype, elem_bytes.data(), n_elems);
        if (!cs.jagged) {
            cols.emplace_back(cs.name, std::move(elems));
        } else {
            cols.emplace_back(
                cs.name, JaggedArray::from_counts(FlatArray::of_i64(std::move(counts)),
                                                  std::move(elems)));
        }
    }
    if (payload_bytes) *payload_bytes = fetched;
    return EventTable(stop - start, std::move(cols));
}

std::vector<ColumnSchema> read_schema(const std::string& path) {
    return CfpkReader(std::make_shared<LocalFile>(path)).schema();
}

EventTable read_columns(const std::string& path, const std::vector<std::string>& names,
                        std::int64_t start, std::int64_t stop) {
    return CfpkReader(std::make_shared<LocalFile>(path)).read(names, start, stop);
}

}  // namespace colex
