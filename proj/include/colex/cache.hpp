#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "colex/array.hpp"
#include "colex/format.hpp"

namespace colex {

/// 64-bit FNV-1a, optionally chained by passing the previous hash back in.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL);

/// The cache's file fingerprint: FNV-1a over the header bytes, then the
/// file size (as 8 little-endian bytes).
std::uint64_t file_digest(const CfpkReader& reader);

/// Identifies one derived column over one event range of one file. The
/// digest covers the file's header bytes plus its size — cheap, and it
/// changes whenever schema or row grouping change. (Rewriting payload bytes
/// in place without touching the header would defeat it; don't do that.)
struct CacheKey {
    std::uint64_t file_digest = 0;
    std::int64_t entry_start = 0;
    std::int64_t entry_stop = 0;
    std::string expression;  ///< caller-supplied stable id for the derivation

    bool operator==(const CacheKey&) const = default;

    /// One filesystem-safe string; distinct keys give distinct strings
    /// (expression bytes outside [A-Za-z0-9_.-] are %-encoded).
    std::string to_string() const;
};

CacheKey make_cache_key(const CfpkReader& reader, std::int64_t entry_start,
                        std::int64_t entry_stop, std::string expression);

/// Local-disk cache for derived columns, so repeated runs over the same
/// chunks skip recomputation. Layout under root: one "<key>.col" file per
/// entry plus "index.json" mapping key → {bytes, last_access}. Entry files
/// carry a layout tag, a dtype tag, and the array in the file format's
/// element encodings.
///
/// Thread-safe within one process; concurrent requests for the same key run
/// the producer once and share the result. Cross-process writers only hold
/// an advisory lock around index updates — a shared multi-user cache is out
/// of scope.
class ColumnCache {
public:
    explicit ColumnCache(std::string root);

    struct Result {
        Column value;
        bool hit = false;
    };

    /// Returns the cached column for key, or runs compute, stores, and
    /// returns it. A corrupt entry is deleted, recorded as a warning, and
    /// recomputed — callers never see the corruption.
    Result get_or_compute(const CacheKey& key, const std::function<Column()>& compute);

    /// Drops least-recently-used entries until the cache holds at most
    /// limit_bytes of payload; returns how many bytes were freed.
    std::int64_t evict_to(std::int64_t limit_bytes);

    const std::string& root() const { return root_; }

    /// Messages from self-healing (corrupt entries replaced), oldest first.
    std::vector<std::string> warnings() const;

private:
    Column load_entry(const std::string& path) const;
    void store_entry(const std::string& path, const Column& value) const;
    void touch_index(const std::string& key_str, std::int64_t bytes) const;
    void drop_index(const std::string& key_str) const;
    void note_warning(std::string msg);

    std::string root_;
    mutable std::mutex mu_;  // guards inflight_ and warnings_
    std::map<std::string, std::shared_future<Column>> inflight_;
    std::vector<std::string> warnings_;
};

}  // namespace colex
