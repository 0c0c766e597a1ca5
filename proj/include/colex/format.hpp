#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colex/io.hpp"
#include "colex/table.hpp"

namespace colex {

// CFPK container: "CFPK" magic, u32 version (currently 1), u64 header
// length, a JSON header describing columns and row groups, then the row
// groups back to back. Within a group each column is stored contiguously in
// schema order: flat columns are just their n_events elements; jagged
// columns are per-event u32 counts, a u64 content length, then the content
// elements. Everything is little-endian; f64 is IEEE-754, i64 two's
// complement, bool one byte 0/1.

struct ColumnSchema {
    std::string name;
    Dtype dtype = Dtype::F64;
    bool jagged = false;
};

struct RowGroupMeta {
    std::int64_t n_events = 0;
    std::int64_t byte_offset = 0;  ///< where the group body starts in the file
};

/// Writes schema + row groups to path. Every group must carry exactly the
/// schema's columns, in order, with matching dtypes and layouts.
void write_file(const std::string& path, const std::vector<ColumnSchema>& schema,
                const std::vector<EventTable>& groups);

/// Parsed file metadata plus the byte layout needed for positioned reads.
/// Construction reads the header and walks the group framing (the u64
/// content lengths); it never touches column payloads.
class CfpkReader {
public:
    explicit CfpkReader(FilePtr file);

    const std::vector<ColumnSchema>& schema() const { return schema_; }
    const std::vector<RowGroupMeta>& groups() const { return groups_; }
    std::int64_t total_events() const { return total_; }
    std::int64_t file_size() const { return file_->size(); }
    /// Raw header JSON, handy as a fingerprint of the file's shape.
    const std::string& header_json() const { return header_; }

    /// Reads the named columns for the event range [start, stop), touching
    /// only those columns' bytes. Columns come back in request order. When
    /// payload_bytes is given it receives the number of payload bytes
    /// (counts + elements) this read fetched.
    EventTable read(const std::vector<std::string>& names, std::int64_t start,
                    std::int64_t stop, std::int64_t* payload_bytes = nullptr) const;

private:
    FilePtr file_;
    std::string header_;
    std::vector<ColumnSchema> schema_;
    std::vector<RowGroupMeta> groups_;
    std::int64_t total_ = 0;
    std::vector<std::vector<std::int64_t>> col_start_;  ///< [group][column] byte offset
};

/// Convenience wrappers that open path with a LocalFile.
std::vector<ColumnSchema> read_schema(const std::string& path);
EventTable read_columns(const std::string& path, const std::vector<std::string>& names,
                        std::int64_t start, std::int64_t stop);

}  // namespace colex
