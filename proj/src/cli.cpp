#include "colex/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "colex/cache.hpp"
#include "colex/engine.hpp"
#include "json.hpp"

namespace colex {
namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError:
        case ErrorCode::BadMagic:
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::MalformedHeader:
        case ErrorCode::MalformedPayload:
        case ErrorCode::CacheCorrupt:
            return 2;
        case ErrorCode::NegativeCount:
        case ErrorCode::InvalidName:
        case ErrorCode::DuplicateName:
        case ErrorCode::EmptyFieldSet:
            return 4;
        default:
            return 3;  // processing / shape
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) fail(ErrorCode::IoError, "cannot read '" + path + "'");
    return std::move(buf).str();
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) fail(ErrorCode::IoError, "cannot write '" + path + "'");
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- generate ----------------------------------------------------------------

struct GenerateArgs {
    std::string out_path;
    std::uint64_t seed = 0;
    std::int64_t n_events = 0;
    std::int64_t row_group_size = 10000;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    generate_toy(a.out_path, a.seed, a.n_events, a.row_group_size);
    std::error_code ec;
    auto size = fs::file_size(a.out_path, ec);
    if (ec) fail(ErrorCode::IoError, "cannot stat '" + a.out_path + "'");
    out << "wrote " << a.n_events << " events to " << a.out_path << " (" << size
        << " bytes)\n";
    return 0;
}

// --- inspect -----------------------------------------------------------------

int cmd_inspect(const std::string& path, std::ostream& out) {
    CfpkReader reader(std::make_shared<LocalFile>(path));
    const auto& schema = reader.schema();
    std::size_t width = 0;
    for (const auto& col : schema) width = std::max(width, col.name.size());
    out << "columns (" << schema.size() << "):\n";
    for (const auto& col : schema) {
        const char* dtype = col.dtype == Dtype::F64 ? "f64"
                            : col.dtype == Dtype::I64 ? "i64"
                                                      : "bool";
        out << "  " << std::left << std::setw(static_cast<int>(width)) << col.name
            << "  " << std::setw(4) << dtype << "  " << (col.jagged ? "jagged" : "flat")
            << "\n";
    }
    out << "row groups: " << reader.groups().size() << "\n";
    out << "events: " << reader.total_events() << "\n";
    return 0;
}

// --- run ---------------------------------------------------------------------

struct RunArgs {
    std::string manifest_path;
    std::string out_path;
    std::string executor = "sequential";
    std::int64_t workers = 4;
    std::int64_t chunk_size = 50000;
    std::string cache_dir;
    std::int64_t max_retries = 0;
    std::string report_json;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    Manifest manifest = load_manifest(a.manifest_path);
    ExecutorConfig config = a.executor == "pooled"
                                ? ExecutorConfig::pooled(static_cast<int>(a.workers),
                                                         static_cast<int>(a.max_retries))
                                : ExecutorConfig::sequential();

    std::unique_ptr<ColumnCache> cache;
    if (!a.cache_dir.empty()) cache = std::make_unique<ColumnCache>(a.cache_dir);

    auto processor = builtin_dimuon_processor();
    auto result = run(*processor, manifest, a.chunk_size, config, cache.get());

    spit(a.out_path, result.output.serialize() + "\n");

    const RunReport& r = result.report;
    char wall[32], rate[32];
    std::snprintf(wall, sizeof wall, "%.6f", r.wall_seconds);
    std::snprintf(rate, sizeof rate, "%.1f",
                  r.wall_seconds > 0.0 ? static_cast<double>(r.events_processed) / r.wall_seconds
                                       : 0.0);
    out << "events: " << r.events_processed << "\n";
    out << "chunks: " << r.chunks_processed << "\n";
    out << "bytes read: " << r.bytes_read << "\n";
    out << "wall seconds: " << wall << "\n";
    out << "events/second: " << rate << "\n";

    if (!a.report_json.empty()) {
        nlohmann::ordered_json report{{"events_processed", r.events_processed},
                                      {"chunks_processed", r.chunks_processed},
                                      {"bytes_read", r.bytes_read},
                                      {"wall_seconds", r.wall_seconds},
                                      {"retries", r.retries}};
        spit(a.report_json, report.dump() + "\n");
    }
    if (cache) {
        for (const auto& w : cache->warnings()) err << "cache warning: " << w << "\n";
    }
    return 0;
}

// --- merge -------------------------------------------------------------------

int cmd_merge(const std::string& out_path, const std::vector<std::string>& inputs) {
    if (inputs.size() == 1) {
        spit(out_path, slurp(inputs[0]));  // bit-for-bit, whatever the formatting
        return 0;
    }
    std::vector<Accumulator> parts;
    parts.reserve(inputs.size());
    for (const auto& path : inputs) parts.push_back(Accumulator::deserialize(slurp(path)));
    spit(out_path, deterministic_tree_reduce(std::move(parts)).serialize() + "\n");
    return 0;
}

// --- export ------------------------------------------------------------------

/// Printable coordinate for every slot along one axis: labels for a
/// categorical axis, bin centers for numeric ones. Flow slots, when kept,
/// print as -inf / inf.
std::vector<std::string> axis_coordinates(const Axis& axis, bool include_flow) {
    std::vector<std::string> out;
    if (const auto* cat = std::get_if<CategoricalAxis>(&axis)) {
        out = cat->labels;
        return out;
    }
    if (include_flow) out.push_back(fmt17(-std::numeric_limits<double>::infinity()));
    if (const auto* reg = std::get_if<RegularAxis>(&axis)) {
        for (std::int64_t i = 0; i < reg->n; ++i)
            out.push_back(fmt17(reg->lo + (static_cast<double>(i) + 0.5) *
                                              (reg->hi - reg->lo) /
                                              static_cast<double>(reg->n)));
    } else {
        const auto& edges = std::get<VariableAxis>(axis).edges;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            out.push_back(fmt17((edges[i] + edges[i + 1]) / 2.0));
    }
    if (include_flow) out.push_back(fmt17(std::numeric_limits<double>::infinity()));
    return out;
}

void write_csv(std::ostream& out, const Histogram& h, bool include_flow) {
    const auto& axes = h.axes();
    for (const auto& axis : axes) out << axis_name(axis) << ",";
    out << "sumw,sumw2\n";

    auto dense = h.values(include_flow);
    std::vector<std::vector<std::string>> coords;
    for (const auto& axis : axes) coords.push_back(axis_coordinates(axis, include_flow));

    std::int64_t total = 1;
    for (auto n : dense.shape) total *= n;
    std::vector<std::int64_t> idx(dense.shape.size());
    for (std::int64_t flat = 0; flat < total; ++flat) {
        std::int64_t rem = flat;
        for (std::size_t k = dense.shape.size(); k-- > 0;) {
            idx[k] = rem % dense.shape[k];
            rem /= dense.shape[k];
        }
        for (std::size_t k = 0; k < coords.size(); ++k) out << coords[k][idx[k]] << ",";
        out << fmt17(dense.sumw[flat]) << "," << fmt17(dense.sumw2[flat]) << "\n";
    }
}

int cmd_export(const std::string& in_path, const std::string& hist_name,
               const std::string& format, bool include_flow, std::ostream& out,
               std::ostream& err) {
    Accumulator acc = Accumulator::deserialize(slurp(in_path));

    const Accumulator* node = &acc;
    std::size_t pos = 0;
    while (true) {
        auto dot = hist_name.find('.', pos);
        std::string seg = hist_name.substr(pos, dot - pos);
        if (node->kind() != Accumulator::Kind::Namespace || !node->has(seg)) {
            err << "no histogram named '" << hist_name << "' in " << in_path << "\n";
            return 4;
        }
        node = &node->at(seg);
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    if (node->kind() != Accumulator::Kind::Hist) {
        err << "no histogram named '" << hist_name << "' in " << in_path << "\n";
        return 4;
    }

    if (format == "json")
        out << node->histogram().serialize() << "\n";
    else
        write_csv(out, node->histogram(), include_flow);
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"columnar event analysis toolkit", "colex"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "write a deterministic toy dataset");
    generate->add_option("-o", gen.out_path, "output file")->required();
    generate->add_option("--seed", gen.seed, "generator seed")->required();
    generate->add_option("-n", gen.n_events, "number of events")
        ->required()
        ->check(CLI::NonNegativeNumber);
    generate->add_option("--row-group-size", gen.row_group_size, "events per row group")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "print a file's schema and row groups");
    inspect->add_option("path", inspect_path, "file to inspect")->required();

    RunArgs ra;
    auto* runc = app.add_subcommand("run", "run the dimuon analysis over a manifest");
    runc->add_option("-m", ra.manifest_path, "dataset manifest")->required();
    runc->add_option("-o", ra.out_path, "output accumulator JSON")->required();
    runc->add_option("--executor", ra.executor, "execution strategy")
        ->capture_default_str()
        ->check(CLI::IsMember({"sequential", "pooled"}));
    runc->add_option("--workers", ra.workers, "pooled worker count")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    runc->add_option("--chunk-size", ra.chunk_size, "target events per chunk")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    runc->add_option("--cache-dir", ra.cache_dir, "column cache directory");
    runc->add_option("--max-retries", ra.max_retries, "per-chunk retry budget (pooled)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    runc->add_option("--report-json", ra.report_json, "write the run report here as JSON");

    std::string merge_out;
    std::vector<std::string> merge_in;
    auto* merge = app.add_subcommand("merge", "merge accumulator JSON files");
    merge->add_option("-o", merge_out, "output file")->required();
    merge->add_option("inputs", merge_in, "input files, merged in order")->required();

    std::string export_in, export_hist, export_format = "csv";
    bool export_flow = false;
    auto* exportc = app.add_subcommand("export", "export one histogram from a result");
    exportc->add_option("input", export_in, "accumulator JSON file")->required();
    exportc->add_option("--hist", export_hist, "dotted path of the histogram")->required();
    exportc->add_option("--format", export_format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    exportc->add_flag("--include-flow", export_flow, "keep underflow/overflow rows");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (app.got_subcommand(generate)) return cmd_generate(gen, out);
        if (app.got_subcommand(inspect)) return cmd_inspect(inspect_path, out);
        if (app.got_subcommand(runc)) return cmd_run(ra, out, err);
        if (app.got_subcommand(merge)) return cmd_merge(merge_out, merge_in);
        return cmd_export(export_in, export_hist, export_format, export_flow, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace colex
