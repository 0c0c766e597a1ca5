#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "colex/format.hpp"
#include "colex/io.hpp"

namespace colex {

/// splitmix64; tiny, fast, and reproducible everywhere. All arithmetic is
/// mod 2^64.
class Splitmix64 {
public:
    explicit Splitmix64(std::uint64_t seed) : s_(seed) {}

    std::uint64_t next() {
        s_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = s_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t s_;
};

/// The toy-sample schema: Muon.{pt,eta,phi,charge} jagged plus flat MET.
std::vector<ColumnSchema> toy_schema();

/// Writes a deterministic synthetic sample: same (seed, n_events) means a
/// byte-identical file. Events are cut into row groups of row_group_size
/// (the last one ragged).
void generate_toy(const std::string& path, std::uint64_t seed, std::int64_t n_events,
                  std::int64_t row_group_size = 10000);

/// Named datasets, each an ordered list of file paths.
struct Manifest {
    std::vector<std::pair<std::string, std::vector<std::string>>> datasets;
};

/// Parses {"datasets": {name: [paths...]}}. Dataset order follows the
/// document; relative paths are resolved against base_dir.
Manifest parse_manifest(const std::string& text, const std::string& base_dir);

/// Reads a manifest file; relative paths resolve against its directory.
Manifest load_manifest(const std::string& path);

/// One contiguous slice of one file, the unit of work for the engine.
struct WorkItem {
    std::string dataset;
    std::string file;
    std::int64_t entry_start = 0;
    std::int64_t entry_stop = 0;
    std::int64_t chunk_index = 0;
};

/// Splits every file into chunks of at most target_events (the last chunk of
/// a file may be short; chunks never span files). Order is deterministic:
/// datasets as listed, files as listed, ranges ascending; chunk_index
/// numbers the result densely from zero.
std::vector<WorkItem> plan_chunks(const Manifest& manifest, std::int64_t target_events,
                                  const FileOpener& opener = FileOpener());

}  // namespace colex
