#include "colex/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "colex/wire.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace colex {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string CacheKey::to_string() const {
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (int i = 60; i >= 0; i -= 4) s.push_back(hex[(file_digest >> i) & 0xF]);
    s += '_';
    s += std::to_string(entry_start);
    s += '_';
    s += std::to_string(entry_stop);
    s += '_';
    for (unsigned char c : expression) {
        bool safe = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        if (safe) {
            s.push_back(static_cast<char>(c));
        } else {
            s.push_back('%');
            s.push_back(hex[c >> 4]);
            s.push_back(hex[c & 0xF]);
        }
    }
    return s;
}

std::uint64_t file_digest(const CfpkReader& reader) {
    std::uint64_t d = fnv1a64(reader.header_json());
    std::string size_bytes;
    wire::put_u64(size_bytes, static_cast<std::uint64_t>(reader.file_size()));
    return fnv1a64(size_bytes, d);
}

CacheKey make_cache_key(const CfpkReader& reader, std::int64_t entry_start,
                        std::int64_t entry_stop, std::string expression) {
    CacheKey key;
    key.file_digest = file_digest(reader);
    key.entry_start = entry_start;
    key.entry_stop = entry_stop;
    key.expression = std::move(expression);
    return key;
}

namespace {

constexpr std::uint8_t kLayoutFlat = 0;
constexpr std::uint8_t kLayoutJagged = 1;

std::uint8_t dtype_tag(Dtype dt) {
    switch (dt) {
        case Dtype::F64: return 0;
        case Dtype::I64: return 1;
        case Dtype::Bool: return 2;
    }
    return 0;
}

Dtype tag_dtype(std::uint8_t t, const std::string& path) {
    switch (t) {
        case 0: return Dtype::F64;
        case 1: return Dtype::I64;
        case 2: return Dtype::Bool;
    }
    fail(ErrorCode::CacheCorrupt, "entry '" + path + "': bad dtype tag");
}

/// Advisory lock held while the index is read and rewritten.
class FileLock {
public:
    explicit FileLock(const std::string& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0)
            fail(ErrorCode::IoError, "cannot open lock '" + path + "': " + std::strerror(errno));
        if (::flock(fd_, LOCK_EX) != 0) {
            int err = errno;
            ::close(fd_);
            fail(ErrorCode::IoError, std::string("flock failed: ") + std::strerror(err));
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

std::int64_t now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

nlohmann::json read_index(const fs::path& path) {
    std::ifstream f(path);
    if (!f) return nlohmann::json::object();
    std::stringstream ss;
    ss << f.rdbuf();
    auto doc = nlohmann::json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return nlohmann::json::object();
    return doc;
}

void write_index(const fs::path& path, const nlohmann::json& doc) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) fail(ErrorCode::IoError, "cannot write cache index");
        f << doc.dump();
        f.flush();
        if (!f) fail(ErrorCode::IoError, "cannot write cache index");
    }
    fs::rename(tmp, path);
}

}  // namespace

ColumnCache::ColumnCache(std::string root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create cache root '" + root_ + "'");
}

Column ColumnCache::load_entry(const std::string& path) const {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot open cache entry '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string raw = ss.str();
    const auto* p = reinterpret_cast<const std::uint8_t*>(raw.data());
    const std::int64_t size = static_cast<std::int64_t>(raw.size());

    auto corrupt = [&](const char* what) -> void {
        fail(ErrorCode::CacheCorrupt, "entry '" + path + "': " + what);
    };

    if (size < 10) corrupt("truncated header");
    std::uint8_t layout = p[0];
    Dtype dt = tag_dtype(p[1], path);
    std::int64_t n = static_cast<std::int64_t>(wire::get_u64(p + 2));
    std::int64_t esz = wire::elem_size(dt);
    std::int64_t pos = 10;
    if (n < 0 || n > size) corrupt("implausible length");

    if (layout == kLayoutFlat) {
        if (size != pos + n * esz) corrupt("length mismatch");
        return wire::decode_elements(dt, p + pos, n);
    }
    if (layout != kLayoutJagged) corrupt("bad layout tag");

    if (size < pos + 4 * n + 8) corrupt("truncated counts");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n));
    for (std::int64_t e = 0; e < n; ++e)
        counts[static_cast<std::size_t>(e)] = wire::get_u32(p + pos + 4 * e);
    pos += 4 * n;
    std::int64_t content_len = static_cast<std::int64_t>(wire::get_u64(p + pos));
    pos += 8;
    if (content_len < 0 || content_len > size) corrupt("implausible length");
    if (size != pos + content_len * esz) corrupt("length mismatch");
    FlatArray content = wire::decode_elements(dt, p + pos, content_len);
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (total != content_len) corrupt("counts disagree with content");
    return JaggedArray::from_counts(FlatArray::of_i64(std::move(counts)), std::move(content));
}

void ColumnCache::store_entry(const std::string& path, const Column& value) const {
    std::string out;
    if (const auto* flat = std::get_if<FlatArray>(&value)) {
        out.push_back(static_cast<char>(kLayoutFlat));
        out.push_back(static_cast<char>(dtype_tag(flat->dtype())));
        wire::put_u64(out, static_cast<std::uint64_t>(flat->size()));
        wire::append_elements(out, *flat, 0, flat->size());
    } else {
        const auto& jag = std::get<JaggedArray>(value);
        out.push_back(static_cast<char>(kLayoutJagged));
        out.push_back(static_cast<char>(dtype_tag(jag.dtype())));
        wire::put_u64(out, static_cast<std::uint64_t>(jag.size()));
        auto offs = jag.offsets();
        for (std::int64_t e = 0; e < jag.size(); ++e)
            wire::put_u32(out, static_cast<std::uint32_t>(offs[e + 1] - offs[e]));
        wire::put_u64(out, static_cast<std::uint64_t>(jag.content().size()));
        wire::append_elements(out, jag.content(), 0, jag.content().size());
    }

    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorCode::IoError, "cannot write cache entry '" + path + "'");
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        f.flush();
        if (!f) fail(ErrorCode::IoError, "cannot write cache entry '" + path + "'");
    }
    fs::rename(tmp, path);
}

void ColumnCache::touch_index(const std::string& key_str, std::int64_t bytes) const {
    FileLock lock((fs::path(root_) / ".lock").string());
    auto index_path = fs::path(root_) / "index.json";
    auto doc = read_index(index_path);
    doc[key_str] = {{"bytes", bytes}, {"last_access", now_seconds()}};
    write_index(index_path, doc);
}

void ColumnCache::drop_index(const std::string& key_str) const {
    FileLock lock((fs::path(root_) / ".lock").string());
    auto index_path = fs::path(root_) / "index.json";
    auto doc = read_index(index_path);
    doc.erase(key_str);
    write_index(index_path, doc);
}

void ColumnCache::note_warning(std::string msg) {
    std::lock_guard<std::mutex> guard(mu_);
    warnings_.push_back(std::move(msg));
}

std::vector<std::string> ColumnCache::warnings() const {
    std::lock_guard<std::mutex> guard(mu_);
    return warnings_;
}

ColumnCache::Result ColumnCache::get_or_compute(const CacheKey& key,
                                                const std::function<Column()>& compute) {
    const std::string key_str = key.to_string();
    const std::string entry_path = (fs::path(root_) / (key_str + ".col")).string();

    // In-flight dedup: whoever inserts the promise does the work; everyone
    // else waits on the shared future.
    std::shared_future<Column> theirs;
    std::promise<Column> mine;
    {
        std::lock_guard<std::mutex> guard(mu_);
        auto it = inflight_.find(key_str);
        if (it != inflight_.end()) {
            theirs = it->second;
        } else {
            inflight_.emplace(key_str, mine.get_future().share());
        }
    }
    if (theirs.valid()) return {theirs.get(), true};

    auto finish = [&](Column value, bool hit) -> Result {
        mine.set_value(value);
        std::lock_guard<std::mutex> guard(mu_);
        inflight_.erase(key_str);
        return {std::move(value), hit};
    };

    try {
        if (fs::exists(entry_path)) {
            try {
                Column value = load_entry(entry_path);
                auto bytes = static_cast<std::int64_t>(fs::file_size(entry_path));
                touch_index(key_str, bytes);
                return finish(std::move(value), true);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::CacheCorrupt) throw;
                note_warning(std::string(e.what()) + "; entry replaced");
                std::error_code ec;
                fs::remove(entry_path, ec);
                drop_index(key_str);
            }
        }

        Column value = compute();
        store_entry(entry_path, value);
        touch_index(key_str, static_cast<std::int64_t>(fs::file_size(entry_path)));
        return finish(std::move(value), false);
    } catch (...) {
        mine.set_exception(std::current_exception());
        std::lock_guard<std::mutex> guard(mu_);
        inflight_.erase(key_str);
        throw;
    }
}

std::int64_t ColumnCache::evict_to(std::int64_t limit_bytes) {
    if (limit_bytes < 0) limit_bytes = 0;
    FileLock lock((fs::path(root_) / ".lock").string());
    auto index_path = fs::path(root_) / "index.json";
    auto doc = read_index(index_path);

    struct Row {
        std::string key;
        std::int64_t bytes;
        std::int64_t last_access;
    };
    std::vector<Row> rows;
    std::int64_t total = 0;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        std::int64_t bytes = it.value().value("bytes", std::int64_t{0});
        std::int64_t at = it.value().value("last_access", std::int64_t{0});
        rows.push_back({it.key(), bytes, at});
        total += bytes;
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.last_access != b.last_access ? a.last_access < b.last_access : a.key < b.key;
    });

    std::int64_t freed = 0;
    for (const auto& row : rows) {
        if (total <= limit_bytes) break;
        std::error_code ec;
        fs::remove(fs::path(root_) / (row.key + ".col"), ec);
        doc.erase(row.key);
        total -= row.bytes;
        freed += row.bytes;
    }
    if (freed > 0) write_index(index_path, doc);
    return freed;
}

}  // namespace colex
