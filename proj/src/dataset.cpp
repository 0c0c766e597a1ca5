#include "colex/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace colex {

std::vector<ColumnSchema> toy_schema() {
    return {
        {"Muon.pt", Dtype::F64, true},   {"Muon.eta", Dtype::F64, true},
        {"Muon.phi", Dtype::F64, true},  {"Muon.charge", Dtype::I64, true},
        {"MET", Dtype::F64, false},
    };
}

void generate_toy(const std::string& path, std::uint64_t seed, std::int64_t n_events,
                  std::int64_t row_group_size) {
    if (n_events < 0) fail(ErrorCode::NegativeCount, "n_events must be >= 0");
    if (row_group_size <= 0) fail(ErrorCode::NegativeCount, "row_group_size must be > 0");

    const double pi = 3.14159265358979323846;
    Splitmix64 rng(seed);

    std::vector<EventTable> groups;
    std::vector<std::int64_t> counts;
    std::vector<double> pt, eta, phi, met;
    std::vector<std::int64_t> charge;

    auto flush = [&]() {
        auto cnt = FlatArray::of_i64(counts);
        std::vector<EventTable::NamedColumn> cols;
        cols.emplace_back("Muon.pt", JaggedArray::from_counts(cnt, FlatArray::of_f64(pt)));
        cols.emplace_back("Muon.eta", JaggedArray::from_counts(cnt, FlatArray::of_f64(eta)));
        cols.emplace_back("Muon.phi", JaggedArray::from_counts(cnt, FlatArray::of_f64(phi)));
        cols.emplace_back("Muon.charge",
                          JaggedArray::from_counts(cnt, FlatArray::of_i64(charge)));
        cols.emplace_back("MET", FlatArray::of_f64(met));
        groups.emplace_back(static_cast<std::int64_t>(counts.size()), std::move(cols));
        counts.clear();
        pt.clear();
        eta.clear();
        phi.clear();
        met.clear();
        charge.clear();
    };

    for (std::int64_t e = 0; e < n_events; ++e) {
        std::int64_t k = static_cast<std::int64_t>(rng.next() % 5);
        counts.push_back(k);
        for (std::int64_t m = 0; m < k; ++m) {
            std::uint64_t s = rng.next();
            pt.push_back(15.0 + static_cast<double>(s % 8000) / 100.0);
            s = rng.next();
            eta.push_back(-2.4 + 4.8 * static_cast<double>(s % 10000) / 10000.0);
            s = rng.next();
            phi.push_back(-pi + 2.0 * pi * static_cast<double>(s % 10000) / 10000.0);
            s = rng.next();
            charge.push_back(s % 2 == 0 ? 1 : -1);
        }
        met.push_back(static_cast<double>(rng.next() % 20000) / 100.0);
        if (static_cast<std::int64_t>(counts.size()) == row_group_size) flush();
    }
    if (!counts.empty()) flush();

    write_file(path, toy_schema(), groups);
}

Manifest parse_manifest(const std::string& text, const std::string& base_dir) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("datasets") ||
        !doc["datasets"].is_object())
        fail(ErrorCode::MalformedPayload, "manifest must be {\"datasets\": {...}}");

    // nlohmann::json reorders keys; reparse with ordered_json to keep the
    // document's dataset order.
    nlohmann::ordered_json odoc = nlohmann::ordered_json::parse(text);

    Manifest m;
    for (auto it = odoc["datasets"].begin(); it != odoc["datasets"].end(); ++it) {
        const std::string& name = it.key();
        if (!it.value().is_array() || it.value().empty())
            fail(ErrorCode::MalformedPayload,
                 "dataset '" + name + "' needs a nonempty file list");
        for (const auto& prev : m.datasets)
            if (prev.first == name)
                fail(ErrorCode::MalformedPayload, "duplicate dataset '" + name + "'");
        std::vector<std::string> files;
        for (const auto& jf : it.value()) {
            if (!jf.is_string())
                fail(ErrorCode::MalformedPayload,
                     "dataset '" + name + "': file entries must be strings");
            std::filesystem::path p = jf.get<std::string>();
            if (p.is_relative() && !base_dir.empty())
                p = std::filesystem::path(base_dir) / p;
            files.push_back(p.lexically_normal().string());
        }
        m.datasets.emplace_back(name, std::move(files));
    }
    if (m.datasets.empty()) fail(ErrorCode::MalformedPayload, "manifest lists no datasets");
    return m;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::IoError, "cannot open manifest '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_manifest(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::vector<WorkItem> plan_chunks(const Manifest& manifest, std::int64_t target_events,
                                  const FileOpener& opener) {
    if (target_events <= 0) fail(ErrorCode::NegativeCount, "target_events must be > 0");
    std::vector<WorkItem> items;
    std::int64_t index = 0;
    for (const auto& [dataset, files] : manifest.datasets) {
        for (const auto& file : files) {
            CfpkReader reader(opener.open(file));
            const std::int64_t total = reader.total_events();
            for (std::int64_t at = 0; at < total; at += target_events) {
                WorkItem w;
                w.dataset = dataset;
                w.file = file;
                w.entry_start = at;
                w.entry_stop = std::min(at + target_events, total);
                w.chunk_index = index++;
                items.push_back(std::move(w));
            }
        }
    }
    return items;
}

}  // namespace colex
