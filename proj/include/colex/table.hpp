#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "colex/array.hpp"

namespace colex {

/// Named columns over one chunk of events. A persistent value: "mutators"
/// return a new table; the column arrays themselves are shared, never copied.
///
/// Column names must be nonempty, unique, and match [A-Za-z_][A-Za-z0-9_.]*.
/// The dot is allowed so storage columns like "Muon.pt" can be grouped into
/// collections by prefix.
class EventTable {
public:
    using NamedColumn = std::pair<std::string, Column>;

    EventTable(std::int64_t n_events, std::vector<NamedColumn> columns);

    std::int64_t n_events() const noexcept { return n_events_; }
    const std::vector<NamedColumn>& columns() const noexcept { return columns_; }

    bool has_column(std::string_view name) const;
    const Column& column(std::string_view name) const;  // throws UnknownColumn

    /// Attach (or replace) a column; the receiver is left untouched.
    EventTable with_column(std::string name, Column col) const;

private:
    std::int64_t n_events_;
    std::vector<NamedColumn> columns_;
};

/// Builds a table from columns in the given order.
EventTable table_from_columns(std::vector<EventTable::NamedColumn> cols, std::int64_t n_events);

/// Keeps the events where mask is true, applied to every column alike.
EventTable select_events(const EventTable& t, const FlatArray& mask);

/// A group of jagged fields over one shared structure, so "muons" can be
/// treated as a list of structs: all member arrays carry identical offsets.
class Collection {
public:
    using NamedField = std::pair<std::string, JaggedArray>;

    const std::string& name() const noexcept { return name_; }
    const std::vector<NamedField>& fields() const noexcept { return fields_; }

    bool has_field(std::string_view field) const;
    const JaggedArray& field(std::string_view field) const;  // throws UnknownColumn

    std::int64_t size() const noexcept { return fields_.front().second.size(); }
    std::span<const std::int64_t> offsets() const noexcept {
        return fields_.front().second.offsets();
    }
    std::int64_t count(std::int64_t event) const { return fields_.front().second.count(event); }

private:
    friend Collection zip_collection(std::string, std::vector<NamedField>);
    friend Collection mask_collection(const Collection&, const JaggedArray&);
    friend Collection select_events(const Collection&, const FlatArray&);
    friend Collection gather_fields(const Collection&, const JaggedArray&, std::string);

    Collection(std::string name, std::vector<NamedField> fields)
        : name_(std::move(name)), fields_(std::move(fields)) {}

    std::string name_;
    std::vector<NamedField> fields_;
};

/// Zips jagged fields into a Collection. At least one field; all offsets
/// must agree (StructureMismatch otherwise).
Collection zip_collection(std::string name, std::vector<Collection::NamedField> fields);

/// Keeps the elements where mask is true in every field; the surviving fields
/// share one recomputed offsets sequence.
Collection mask_collection(const Collection& c, const JaggedArray& mask);

/// Keeps whole events where mask is true, across every field.
Collection select_events(const Collection& c, const FlatArray& mask);

/// Gathers every field by the same per-event local indices (the collection
/// analogue of gather_inner); used to turn pair indices into pair legs.
Collection gather_fields(const Collection& c, const JaggedArray& idx, std::string name);

/// Groups the table's "<name>.<field>" jagged columns into a Collection,
/// preserving the table's column order.
Collection collection_from_table(const EventTable& t, std::string_view name);

}  // namespace colex
