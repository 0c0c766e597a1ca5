#include "colex/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "colex/table.hpp"

namespace colex {

namespace {

/// Thrown only by fault injection; the one failure type retries absorb.
struct TransientFault {};

std::string_view kind_label(Accumulator::Kind k) {
    switch (k) {
        case Accumulator::Kind::Counter: return "counter";
        case Accumulator::Kind::IntCounter: return "int counter";
        case Accumulator::Kind::Hist: return "histogram";
        case Accumulator::Kind::Namespace: return "namespace";
        case Accumulator::Kind::Set: return "set";
    }
    return "?";
}

/// Structural comparison of a chunk output against the declared shape —
/// kinds, namespace keys, histogram axes — without perturbing the output.
void check_shape(const Accumulator& decl, const Accumulator& out, const std::string& path) {
    if (decl.kind() != out.kind())
        fail(ErrorCode::ShapeMismatch,
             "processor output at '" + path + "' is " + std::string(kind_label(out.kind())) +
                 ", declared " + std::string(kind_label(decl.kind())));
    switch (decl.kind()) {
        case Accumulator::Kind::Namespace:
            for (const auto& [name, child] : decl.entries()) {
                if (!out.has(name))
                    fail(ErrorCode::ShapeMismatch,
                         "processor output lacks '" + path + "." + name + "'");
                check_shape(child, out.at(name), path + "." + name);
            }
            for (const auto& [name, child] : out.entries())
                if (!decl.has(name))
                    fail(ErrorCode::ShapeMismatch,
                         "processor output has undeclared '" + path + "." + name + "'");
            break;
        case Accumulator::Kind::Hist:
            try {
                Histogram::merge(decl.histogram(), out.histogram());
            } catch (const Error& e) {
                fail(ErrorCode::ShapeMismatch, "histogram at '" + path + "': " + e.what());
            }
            break;
        default:
            break;  // scalar kinds have no inner shape
    }
}

/// Everything a worker needs, all of it read-only or atomic.
struct ChunkRunner {
    const Processor& proc;
    const std::vector<std::string>& cols;
    const Accumulator& shape;
    ColumnCache* cache;
    const FaultPlan* faults;
    const FileOpener& opener;
    const std::map<std::string, std::uint64_t>& digests;
    int max_retries;
    std::atomic<std::int64_t>& bytes_read;
    std::atomic<std::int64_t>& retries;

    EventTable read_table(const WorkItem& w) const {
        if (!cache) {
            CfpkReader reader(opener.open(w.file));
            std::int64_t payload = 0;
            EventTable t = reader.read(cols, w.entry_start, w.entry_stop, &payload);
            bytes_read += payload;
            return t;
        }
        // Read through the cache one column at a time; the file is opened
        // only if some column actually misses.
        std::shared_ptr<CfpkReader> reader;
        std::vector<EventTable::NamedColumn> named;
        for (const auto& col : cols) {
            CacheKey key{digests.at(w.file), w.entry_start, w.entry_stop, col};
            auto res = cache->get_or_compute(key, [&]() -> Column {
                if (!reader) reader = std::make_shared<CfpkReader>(opener.open(w.file));
                std::int64_t payload = 0;
                EventTable one = reader->read({col}, w.entry_start, w.entry_stop, &payload);
                bytes_read += payload;
                return one.columns().front().second;
            });
            named.emplace_back(col, std::move(res.value));
        }
        return EventTable(w.entry_stop - w.entry_start, std::move(named));
    }

    Accumulator run_item(const WorkItem& w) const {
        int planned = 0;
        if (faults) {
            auto it = faults->failures.find(w.chunk_index);
            if (it != faults->failures.end()) planned = it->second;
        }
        int budget = max_retries;
        for (;;) {
            try {
                if (planned > 0) {
                    --planned;
                    throw TransientFault{};
                }
                EventTable events = read_table(w);
                Accumulator out = proc.process(ChunkContext{w.dataset, w.file}, events);
                check_shape(shape, out, "out");
                return out;
            } catch (const TransientFault&) {
                if (budget > 0) {
                    --budget;
                    ++retries;
                    continue;  // re-run from I/O onward
                }
                throw ProcessorError(w.chunk_index, "injected transient failure, retries exhausted");
            } catch (const ProcessorError&) {
                throw;
            } catch (const Error& e) {
                if (e.code() == ErrorCode::ShapeMismatch) throw;
                throw ProcessorError(w.chunk_index, e.what());
            } catch (const std::exception& e) {
                throw ProcessorError(w.chunk_index, e.what());
            }
        }
    }
};

std::vector<Accumulator> run_sequential(const ChunkRunner& runner,
                                        const std::vector<WorkItem>& plan) {
    std::vector<Accumulator> outs;
    outs.reserve(plan.size());
    for (const auto& item : plan) outs.push_back(runner.run_item(item));
    return outs;
}

std::vector<Accumulator> run_pooled(const ChunkRunner& runner, const std::vector<WorkItem>& plan,
                                    int workers) {
    std::vector<std::optional<Accumulator>> slots(plan.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::vector<std::pair<std::int64_t, std::exception_ptr>> errors;

    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            try {
                slots[i].emplace(runner.run_item(plan[i]));
            } catch (...) {
                std::lock_guard<std::mutex> guard(err_mu);
                errors.emplace_back(plan[i].chunk_index, std::current_exception());
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();

    if (!errors.empty()) {
        // Deterministic choice regardless of scheduling: lowest chunk first.
        auto it = std::min_element(
            errors.begin(), errors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
        std::rethrow_exception(it->second);
    }

    std::vector<Accumulator> outs;
    outs.reserve(slots.size());
    for (auto& s : slots) outs.push_back(std::move(*s));
    return outs;
}

}  // namespace

Accumulator deterministic_tree_reduce(std::vector<Accumulator> accs) {
    if (accs.empty()) fail(ErrorCode::EmptyFieldSet, "nothing to reduce");
    while (accs.size() > 1) {
        std::vector<Accumulator> up;
        up.reserve(accs.size() / 2 + 1);
        for (std::size_t i = 0; i + 1 < accs.size(); i += 2)
            up.push_back(Accumulator::merge(accs[i], accs[i + 1]));
        if (accs.size() % 2 == 1) up.push_back(std::move(accs.back()));
        accs = std::move(up);
    }
    return std::move(accs.front());
}

RunResult run(const Processor& processor, const Manifest& manifest,
              std::int64_t target_events_per_chunk, const ExecutorConfig& config,
              ColumnCache* cache, const FaultPlan* faults, const FileOpener* opener) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.kind == ExecutorConfig::Kind::Pooled) {
        if (config.workers < 1) fail(ErrorCode::NegativeCount, "workers must be >= 1");
        if (config.max_retries < 0) fail(ErrorCode::NegativeCount, "max_retries must be >= 0");
    }
    if (faults)
        for (const auto& [index, count] : faults->failures)
            if (count < 0) fail(ErrorCode::NegativeCount, "fault counts must be >= 0");

    static const FileOpener local_opener;
    const FileOpener& op = opener ? *opener : local_opener;

    const std::vector<WorkItem> plan = plan_chunks(manifest, target_events_per_chunk, op);
    const std::vector<std::string> cols = processor.columns();

    // Preflight: every referenced file must carry every required column.
    // Digests double as "this file was checked" markers and cache key parts.
    std::map<std::string, std::uint64_t> digests;
    for (const auto& [dataset, files] : manifest.datasets) {
        for (const auto& file : files) {
            if (digests.count(file)) continue;
            CfpkReader reader(op.open(file));
            for (const auto& col : cols) {
                bool found = false;
                for (const auto& cs : reader.schema())
                    if (cs.name == col) {
                        found = true;
                        break;
                    }
                if (!found)
                    fail(ErrorCode::UnknownColumn,
                         "file '" + file + "' has no column '" + col + "'");
            }
            digests[file] = file_digest(reader);
        }
    }

    const Accumulator shape = processor.accumulator_shape();
    std::atomic<std::int64_t> bytes_read{0};
    std::atomic<std::int64_t> retries{0};
    const int budget = config.kind == ExecutorConfig::Kind::Pooled ? config.max_retries : 0;
    ChunkRunner runner{processor, cols,   shape,     cache,      faults,
                       op,        digests, budget,    bytes_read, retries};

    std::vector<Accumulator> outs = config.kind == ExecutorConfig::Kind::Sequential
                                        ? run_sequential(runner, plan)
                                        : run_pooled(runner, plan, config.workers);

    Accumulator output = outs.empty() ? Accumulator::identity_of(shape)
                                      : deterministic_tree_reduce(std::move(outs));

    RunReport report;
    report.chunks_processed = static_cast<std::int64_t>(plan.size());
    for (const auto& item : plan) report.events_processed += item.entry_stop - item.entry_start;
    report.bytes_read = bytes_read.load();
    report.retries = retries.load();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(output), report};
}

namespace {

class DimuonProcessor final : public Processor {
public:
    std::vector<std::string> columns() const override {
        return {"Muon.pt", "Muon.eta", "Muon.phi", "Muon.charge"};
    }

    Accumulator accumulator_shape() const override {
        return Accumulator::group({
            {"mass", Accumulator::hist(mass_hist())},
            {"cutflow", Accumulator::group({
                            {"all", Accumulator::int_counter(0)},
                            {"obj_sel", Accumulator::int_counter(0)},
                            {"ge2mu", Accumulator::int_counter(0)},
                            {"os_pairs", Accumulator::int_counter(0)},
                        })},
            {"files", Accumulator::set({})},
        });
    }

    Accumulator process(const ChunkContext& chunk, const EventTable& events) const override {
        Collection muons = collection_from_table(events, "Muon");

        // Object selection: pt > 20 GeV and |eta| < 2.4, per muon.
        JaggedArray good = elementwise(
            BinaryOp::And,
            elementwise(BinaryOp::Gt, muons.field("pt"), Scalar::of_f64(20.0)),
            elementwise(BinaryOp::Lt, unary(UnaryOp::Abs, muons.field("eta")),
                        Scalar::of_f64(2.4)));
        Collection sel = mask_collection(muons, good);

        FlatArray nmu = reduce(ReduceKind::Count, sel.field("pt"));
        const std::int64_t n_all = events.n_events();
        const std::int64_t n_obj =
            count_true(elementwise(BinaryOp::Ge, nmu, Scalar::of_i64(1)));
        FlatArray evcut = elementwise(BinaryOp::Ge, nmu, Scalar::of_i64(2));
        const std::int64_t n_ge2 = count_true(evcut);
        Collection two = select_events(sel, evcut);

        // All distinct pairs, keeping opposite charges (product exactly -1).
        PairIndices pairs = distinct_pairs(two.field("pt"));
        Collection leg1 = gather_fields(two, pairs.left, "mu1");
        Collection leg2 = gather_fields(two, pairs.right, "mu2");
        JaggedArray opposite = elementwise(
            BinaryOp::Eq,
            elementwise(BinaryOp::Mul, leg1.field("charge"), leg2.field("charge")),
            Scalar::of_i64(-1));
        const std::int64_t n_os = count_true(opposite.content());
        Collection p1 = mask_collection(leg1, opposite);
        Collection p2 = mask_collection(leg2, opposite);

        // m = sqrt(2 pt1 pt2 (cosh(eta1-eta2) - cos(phi1-phi2)))
        JaggedArray pt2 = elementwise(
            BinaryOp::Mul, elementwise(BinaryOp::Mul, p1.field("pt"), p2.field("pt")),
            Scalar::of_f64(2.0));
        JaggedArray opening = elementwise(
            BinaryOp::Sub,
            unary(UnaryOp::Cosh,
                  elementwise(BinaryOp::Sub, p1.field("eta"), p2.field("eta"))),
            unary(UnaryOp::Cos,
                  elementwise(BinaryOp::Sub, p1.field("phi"), p2.field("phi"))));
        FlatArray mass = flatten(unary(UnaryOp::Sqrt, elementwise(BinaryOp::Mul, pt2, opening)));

        Histogram h = mass_hist();
        std::vector<std::string> labels(static_cast<std::size_t>(mass.size()), chunk.dataset);
        h.fill({Histogram::Coord(std::move(labels)), Histogram::Coord(mass)});

        return Accumulator::group({
            {"mass", Accumulator::hist(std::move(h))},
            {"cutflow", Accumulator::group({
                            {"all", Accumulator::int_counter(n_all)},
                            {"obj_sel", Accumulator::int_counter(n_obj)},
                            {"ge2mu", Accumulator::int_counter(n_ge2)},
                            {"os_pairs", Accumulator::int_counter(n_os)},
                        })},
            {"files", Accumulator::set({chunk.file})},
        });
    }

private:
    static Histogram mass_hist() {
        return Histogram({CategoricalAxis{"dataset", {}}, RegularAxis{"mass", 60, 0.0, 120.0}});
    }
};

}  // namespace

std::unique_ptr<Processor> builtin_dimuon_processor() {
    return std::make_unique<DimuonProcessor>();
}

}  // namespace colex
