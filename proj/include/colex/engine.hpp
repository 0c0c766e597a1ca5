#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "colex/accumulator.hpp"
#include "colex/cache.hpp"
#include "colex/dataset.hpp"

namespace colex {

/// What a chunk knows about its origin; handed to Processor::process so the
/// output can record provenance (dataset label, source file).
struct ChunkContext {
    std::string dataset;
    std::string file;
};

/// The user-facing analysis contract: declare the columns you need and the
/// shape you produce, then turn one chunk of events into one accumulator.
/// process must be a pure function of its arguments — workers call it from
/// several threads at once and retries re-run it wholesale.
class Processor {
public:
    virtual ~Processor() = default;
    virtual std::vector<std::string> columns() const = 0;
    virtual Accumulator accumulator_shape() const = 0;
    virtual Accumulator process(const ChunkContext& chunk, const EventTable& events) const = 0;
};

/// Sequential runs chunks in plan order on the calling thread. Pooled fans
/// them out over a worker-thread pool; only Pooled retries injected faults.
struct ExecutorConfig {
    enum class Kind { Sequential, Pooled };

    Kind kind = Kind::Sequential;
    int workers = 4;      // Pooled: pool size, >= 1
    int max_retries = 0;  // Pooled: transient-failure budget per chunk, >= 0

    static ExecutorConfig sequential() { return {}; }
    static ExecutorConfig pooled(int workers, int max_retries = 0) {
        ExecutorConfig c;
        c.kind = Kind::Pooled;
        c.workers = workers;
        c.max_retries = max_retries;
        return c;
    }
};

struct RunReport {
    std::int64_t events_processed = 0;
    std::int64_t chunks_processed = 0;
    std::int64_t bytes_read = 0;  ///< column payload bytes fetched from data files
    double wall_seconds = 0.0;
    std::int64_t retries = 0;
};

/// Test harness: how many times each chunk fails transiently before it
/// succeeds. Chunks are pure, so these are the only modeled failures.
struct FaultPlan {
    std::map<std::int64_t, int> failures;  // chunk_index -> count
};

struct RunResult {
    Accumulator output;
    RunReport report;
};

/// Balanced pairwise reduction of the chunk-index-ordered list: each pass
/// merges element 2i with 2i+1 and carries an odd tail up. The tree depends
/// only on list length, never on completion timing, so results are
/// reproducible across executors. Empty input throws (the caller supplies
/// the identity when there is no work).
Accumulator deterministic_tree_reduce(std::vector<Accumulator> accs);

/// Plans chunks over the manifest, checks every referenced file carries the
/// processor's columns (before any processing), runs each chunk on the
/// chosen executor reading only those columns, and reduces the outputs in
/// chunk-index order. With a cache, per-chunk columns are read through it
/// keyed by file digest + range + column name. Output is identical across
/// executor choices and worker counts.
RunResult run(const Processor& processor, const Manifest& manifest,
              std::int64_t target_events_per_chunk, const ExecutorConfig& config,
              ColumnCache* cache = nullptr, const FaultPlan* faults = nullptr,
              const FileOpener* opener = nullptr);

/// The reference analysis: select muons with pt > 20 GeV and |eta| < 2.4,
/// keep events with at least two, form all distinct opposite-charge pairs,
/// and histogram the pair mass per dataset. Output namespace:
///   mass:    Hist[Categorical(dataset) x Regular(60, 0, 120)]
///   cutflow: {all, obj_sel, ge2mu, os_pairs} IntCounters
///   files:   set of source files seen
std::unique_ptr<Processor> builtin_dimuon_processor();

}  // namespace colex
