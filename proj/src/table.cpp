#include "colex/table.hpp"

#include <algorithm>

namespace colex {

namespace {

bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    auto head = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9') || c == '.'; };
    if (!head(name[0])) return false;
    return std::all_of(name.begin() + 1, name.end(), tail);
}

void check_column_fits(const std::string& name, const Column& col, std::int64_t n_events) {
    if (column_events(col) != n_events)
        fail(ErrorCode::LengthMismatch,
             "column '" + name + "' covers " + std::to_string(column_events(col)) +
                 " events, table has " + std::to_string(n_events));
}

}  // namespace

EventTable::EventTable(std::int64_t n_events, std::vector<NamedColumn> columns)
    : n_events_(n_events), columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const auto& [name, col] = columns_[i];
        if (!valid_name(name)) fail(ErrorCode::InvalidName, "bad column name '" + name + "'");
        check_column_fits(name, col, n_events_);
        for (std::size_t j = 0; j < i; ++j)
            if (columns_[j].first == name)
                fail(ErrorCode::DuplicateName, "column '" + name + "' given twice");
    }
}

bool EventTable::has_column(std::string_view name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const auto& c) { return c.first == name; });
}

const Column& EventTable::column(std::string_view name) const {
    for (const auto& [n, col] : columns_)
        if (n == name) return col;
    fail(ErrorCode::UnknownColumn, "no column '" + std::string(name) + "' in table");
}

EventTable EventTable::with_column(std::string name, Column col) const {
    if (!valid_name(name)) fail(ErrorCode::InvalidName, "bad column name '" + name + "'");
    check_column_fits(name, col, n_events_);
    std::vector<NamedColumn> cols = columns_;
    auto it = std::find_if(cols.begin(), cols.end(),
                           [&](const auto& c) { return c.first == name; });
    if (it != cols.end())
        it->second = std::move(col);
    else
        cols.emplace_back(std::move(name), std::move(col));
    return EventTable(n_events_, std::move(cols));
}

EventTable table_from_columns(std::vector<EventTable::NamedColumn> cols, std::int64_t n_events) {
    return EventTable(n_events, std::move(cols));
}

EventTable select_events(const EventTable& t, const FlatArray& mask) {
    std::vector<EventTable::NamedColumn> cols;
    cols.reserve(t.columns().size());
    for (const auto& [name, col] : t.columns()) {
        if (const auto* f = std::get_if<FlatArray>(&col))
            cols.emplace_back(name, select_events(*f, mask));
        else
            cols.emplace_back(name, select_events(std::get<JaggedArray>(col), mask));
    }
    return EventTable(count_true(mask), std::move(cols));
}

bool Collection::has_field(std::string_view field) const {
    return std::any_of(fields_.begin(), fields_.end(),
                       [&](const auto& f) { return f.first == field; });
}

const JaggedArray& Collection::field(std::string_view field) const {
    for (const auto& [n, arr] : fields_)
        if (n == field) return arr;
    fail(ErrorCode::UnknownColumn, "collection '" + name_ + "' has no field '" +
                                       std::string(field) + "'");
}

Collection zip_collection(std::string name, std::vector<Collection::NamedField> fields) {
    if (fields.empty())
        fail(ErrorCode::EmptyFieldSet, "collection '" + name + "' needs at least one field");
    for (std::size_t i = 1; i < fields.size(); ++i)
        if (!fields[i].second.same_structure(fields[0].second))
            fail(ErrorCode::StructureMismatch,
                 "field '" + fields[i].first + "' does not share the offsets of '" +
                     fields[0].first + "'");
    for (std::size_t i = 0; i < fields.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (fields[j].first == fields[i].first)
                fail(ErrorCode::DuplicateName, "field '" + fields[i].first + "' given twice");
    return Collection(std::move(name), std::move(fields));
}

Collection mask_collection(const Collection& c, const JaggedArray& mask) {
    std::vector<Collection::NamedField> out;
    out.reserve(c.fields().size());
    for (const auto& [fname, arr] : c.fields()) {
        JaggedArray kept = compress_inner(arr, mask);
        // reuse the first field's offsets so the whole collection shares one
        if (!out.empty()) kept = out.front().second.with_content(kept.content());
        out.emplace_back(fname, std::move(kept));
    }
    return Collection(c.name(), std::move(out));
}

Collection select_events(const Collection& c, const FlatArray& mask) {
    std::vector<Collection::NamedField> out;
    out.reserve(c.fields().size());
    for (const auto& [fname, arr] : c.fields()) {
        JaggedArray kept = select_events(arr, mask);
        if (!out.empty()) kept = out.front().second.with_content(kept.content());
        out.emplace_back(fname, std::move(kept));
    }
    return Collection(c.name(), std::move(out));
}

Collection gather_fields(const Collection& c, const JaggedArray& idx, std::string name) {
    std::vector<Collection::NamedField> out;
    out.reserve(c.fields().size());
    for (const auto& [fname, arr] : c.fields()) {
        JaggedArray picked = gather_inner(arr, idx);
        if (!out.empty()) picked = out.front().second.with_content(picked.content());
        out.emplace_back(fname, std::move(picked));
    }
    return Collection(std::move(name), std::move(out));
}

Collection collection_from_table(const EventTable& t, std::string_view name) {
    const std::string prefix = std::string(name) + ".";
    std::vector<Collection::NamedField> fields;
    for (const auto& [cname, col] : t.columns()) {
        if (cname.rfind(prefix, 0) != 0) continue;
        const auto* j = std::get_if<JaggedArray>(&col);
        if (!j)
            fail(ErrorCode::TypeMismatch, "column '" + cname + "' is flat, cannot join '" +
                                              std::string(name) + "'");
        fields.emplace_back(cname.substr(prefix.size()), *j);
    }
    if (fields.empty())
        fail(ErrorCode::EmptyFieldSet,
             "table has no '" + prefix + "*' columns to group");
    return zip_collection(std::string(name), std::move(fields));
}

}  // namespace colex
