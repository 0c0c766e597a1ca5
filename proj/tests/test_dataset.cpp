#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "colex/dataset.hpp"
#include "colex/format.hpp"
#include "colex/io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace colex;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        auto base = fs::temp_directory_path();
        for (int i = 0;; ++i) {
            auto cand = base / ("colex-test-" + std::to_string(::getpid()) + "-" +
                                std::to_string(i));
            std::error_code ec;
            if (fs::create_directory(cand, ec)) {
                path = cand;
                return;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(f.good());
}

JaggedArray jag(std::vector<std::vector<double>> rows) {
    std::vector<std::int64_t> offs{0};
    std::vector<double> content;
    for (const auto& r : rows) {
        for (double v : r) content.push_back(v);
        offs.push_back(static_cast<std::int64_t>(content.size()));
    }
    return JaggedArray(std::move(offs), FlatArray::of_f64(std::move(content)));
}

// An independent transcription of the generator's stream, kept deliberately
// separate from the library so a slip in either side shows up.
struct RefRng {
    std::uint64_t state;
    std::uint64_t operator()() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

struct RefToy {
    std::vector<std::int64_t> counts;
    std::vector<double> pt, eta, phi, met;
    std::vector<std::int64_t> charge;
};

RefToy ref_toy(std::uint64_t seed, std::int64_t n_events) {
    const double pi = 3.14159265358979323846;
    RefRng rng{seed};
    RefToy t;
    for (std::int64_t e = 0; e < n_events; ++e) {
        std::int64_t k = static_cast<std::int64_t>(rng() % 5);
        t.counts.push_back(k);
        for (std::int64_t m = 0; m < k; ++m) {
            std::uint64_t s = rng();
            t.pt.push_back(15.0 + static_cast<double>(s % 8000) / 100.0);
            s = rng();
            t.eta.push_back(-2.4 + 4.8 * static_cast<double>(s % 10000) / 10000.0);
            s = rng();
            t.phi.push_back(-pi + 2.0 * pi * static_cast<double>(s % 10000) / 10000.0);
            s = rng();
            t.charge.push_back(s % 2 == 0 ? 1 : -1);
        }
        t.met.push_back(static_cast<double>(rng() % 20000) / 100.0);
    }
    return t;
}

std::vector<double> vec_f64(const FlatArray& a) {
    auto s = a.f64();
    return {s.begin(), s.end()};
}
std::vector<std::int64_t> vec_i64(const FlatArray& a) {
    auto s = a.i64();
    return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("splitmix64 matches its published stream") {
    Splitmix64 r(0);
    CHECK(r.next() == 0xE220A8397B1DCDAFULL);
    CHECK(r.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(r.next() == 0x06C45D188009454FULL);

    Splitmix64 a(0xDEADBEEFULL);
    RefRng b{0xDEADBEEFULL};
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b());
}

TEST_CASE("a written file reads back bitwise identical") {
    TempDir dir;
    std::vector<ColumnSchema> schema{
        {"x", Dtype::F64, false},
        {"flag", Dtype::Bool, false},
        {"jet_e", Dtype::F64, true},
        {"jet_id", Dtype::I64, true},
    };
    const double qnan = std::numeric_limits<double>::quiet_NaN();
    std::vector<EventTable> groups;
    groups.push_back(EventTable(
        3, {{"x", FlatArray::of_f64({1.5, qnan, -0.0})},
            {"flag", FlatArray::of_bool({1, 0, 1})},
            {"jet_e", jag({{10.0, 20.0}, {}, {30.0}})},
            {"jet_id", JaggedArray({0, 2, 2, 3}, FlatArray::of_i64({7, -8, 9}))}}));
    groups.push_back(EventTable(
        2, {{"x", FlatArray::of_f64({4.0, 5.0})},
            {"flag", FlatArray::of_bool({0, 0})},
            {"jet_e", jag({{}, {-1.25}})},
            {"jet_id", JaggedArray({0, 0, 1}, FlatArray::of_i64({42}))}}));

    auto path = dir.file("rt.cfpk");
    write_file(path, schema, groups);

    CfpkReader reader(std::make_shared<LocalFile>(path));
    CHECK(reader.total_events() == 5);
    REQUIRE(reader.groups().size() == 2);
    CHECK(reader.groups()[0].n_events == 3);
    CHECK(reader.groups()[1].n_events == 2);
    REQUIRE(reader.schema().size() == 4);
    CHECK(reader.schema()[2].name == "jet_e");
    CHECK(reader.schema()[2].jagged);
    CHECK(reader.schema()[1].dtype == Dtype::Bool);

    auto t = reader.read({"x", "flag", "jet_e", "jet_id"}, 0, 5);
    CHECK(t.n_events() == 5);
    Column want_x = FlatArray::of_f64({1.5, qnan, -0.0, 4.0, 5.0});
    CHECK(column_equals(t.column("x"), want_x));
    Column want_flag = FlatArray::of_bool({1, 0, 1, 0, 0});
    CHECK(column_equals(t.column("flag"), want_flag));
    Column want_e = jag({{10.0, 20.0}, {}, {30.0}, {}, {-1.25}});
    CHECK(column_equals(t.column("jet_e"), want_e));
    Column want_id = JaggedArray({0, 2, 2, 3, 3, 4}, FlatArray::of_i64({7, -8, 9, 42}));
    CHECK(column_equals(t.column("jet_id"), want_id));
}

TEST_CASE("writing the same content twice yields identical bytes") {
    TempDir dir;
    generate_toy(dir.file("a.cfpk"), 99, 500, 128);
    generate_toy(dir.file("b.cfpk"), 99, 500, 128);
    CHECK(slurp(dir.file("a.cfpk")) == slurp(dir.file("b.cfpk")));
    generate_toy(dir.file("c.cfpk"), 100, 500, 128);
    CHECK(slurp(dir.file("a.cfpk")) != slurp(dir.file("c.cfpk")));
}

TEST_CASE("range reads agree with slicing the whole table") {
    TempDir dir;
    auto path = dir.file("sliced.cfpk");
    generate_toy(path, 7, 300, 64);  // groups of 64, last ragged

    CfpkReader reader(std::make_shared<LocalFile>(path));
    auto whole = reader.read({"Muon.pt", "Muon.charge", "MET"}, 0, 300);
    const auto& all_pt = std::get<JaggedArray>(whole.column("Muon.pt"));
    const auto& all_q = std::get<JaggedArray>(whole.column("Muon.charge"));
    const auto& all_met = std::get<FlatArray>(whole.column("MET"));

    std::mt19937_64 pick(42);
    for (int trial = 0; trial < 25; ++trial) {
        std::int64_t a = static_cast<std::int64_t>(pick() % 301);
        std::int64_t b = static_cast<std::int64_t>(pick() % 301);
        if (a > b) std::swap(a, b);
        auto part = reader.read({"Muon.pt", "Muon.charge", "MET"}, a, b);
        CHECK(part.n_events() == b - a);

        const auto& pt = std::get<JaggedArray>(part.column("Muon.pt"));
        const auto& q = std::get<JaggedArray>(part.column("Muon.charge"));
        const auto& met = std::get<FlatArray>(part.column("MET"));

        auto offs = all_pt.offsets();
        REQUIRE(pt.size() == b - a);
        for (std::int64_t e = 0; e < b - a; ++e) {
            REQUIRE(pt.count(e) == all_pt.count(a + e));
            for (std::int64_t j = 0; j < pt.count(e); ++j) {
                CHECK(pt.content().f64()[pt.offsets()[e] + j] ==
                      all_pt.content().f64()[offs[a + e] + j]);
                CHECK(q.content().i64()[q.offsets()[e] + j] ==
                      all_q.content().i64()[offs[a + e] + j]);
            }
            CHECK(met.f64()[e] == all_met.f64()[a + e]);
        }
    }

    auto empty = reader.read({"MET", "Muon.eta"}, 150, 150);
    CHECK(empty.n_events() == 0);
    CHECK(std::get<FlatArray>(empty.column("MET")).size() == 0);
    CHECK(std::get<JaggedArray>(empty.column("Muon.eta")).size() == 0);
}

TEST_CASE("reading a column subset never touches other columns' payloads") {
    TempDir dir;
    auto path = dir.file("lazy.cfpk");
    generate_toy(path, 11, 400, 100);

    // Walk the container's framing independently to map out where each
    // column's payload (counts + elements) lives.
    std::string raw = slurp(path);
    auto u32at = [&](std::int64_t p) {
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(raw[p + i]);
        return v;
    };
    auto u64at = [&](std::int64_t p) {
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(raw[p + i]);
        return v;
    };
    REQUIRE(raw.substr(0, 4) == "CFPK");
    REQUIRE(u32at(4) == 1);
    std::int64_t hlen = static_cast<std::int64_t>(u64at(8));
    auto header = nlohmann::json::parse(raw.substr(16, hlen));

    struct Span {
        std::int64_t lo, hi;
    };
    std::vector<std::pair<std::string, Span>> payloads;
    std::int64_t pos = 16 + hlen;
    for (const auto& jg : header["row_groups"]) {
        std::int64_t n = jg["n_events"].get<std::int64_t>();
        for (const auto& jc : header["columns"]) {
            std::string name = jc["name"].get<std::string>();
            std::int64_t esz = jc["dtype"] == "bool" ? 1 : 8;
            if (jc["layout"] == "flat") {
                payloads.push_back({name, {pos, pos + n * esz}});
                pos += n * esz;
            } else {
                std::int64_t len = static_cast<std::int64_t>(u64at(pos + 4 * n));
                payloads.push_back({name, {pos, pos + 4 * n}});  // counts
                payloads.push_back({name, {pos + 4 * n + 8, pos + 4 * n + 8 + len * esz}});
                pos += 4 * n + 8 + len * esz;
            }
        }
    }
    REQUIRE(pos == static_cast<std::int64_t>(raw.size()));

    auto counting = std::make_shared<CountingFile>(std::make_shared<LocalFile>(path));
    CfpkReader reader(counting);
    auto after_open = counting->reads().size();
    auto t = reader.read({"MET", "Muon.pt"}, 50, 250);
    CHECK(t.n_events() == 200);

    auto reads = counting->reads();
    CHECK(reads.size() > after_open);  // the read itself did touch the file
    for (const auto& [off, len] : reads) {
        for (const auto& [name, span] : payloads) {
            if (name == "MET" || name == "Muon.pt") continue;
            bool overlaps = off < span.hi && off + len > span.lo;
            CHECK_MESSAGE(!overlaps, "read [", off, ", ", off + len,
                          ") overlaps payload of ", name);
        }
    }
}

TEST_CASE("schema validation rejects mismatched row groups") {
    TempDir dir;
    std::vector<ColumnSchema> schema{{"a", Dtype::F64, false}, {"b", Dtype::I64, true}};
    auto path = dir.file("bad.cfpk");

    auto jag_b = JaggedArray({0, 1}, FlatArray::of_i64({5}));
    EventTable good(1, {{"a", FlatArray::of_f64({1.0})}, {"b", jag_b}});
    CHECK_NOTHROW(write_file(path, schema, {good}));

    EventTable missing(1, {{"a", FlatArray::of_f64({1.0})}});
    CHECK(code_of([&] { write_file(path, schema, {missing}); }) == ErrorCode::SchemaMismatch);

    EventTable reordered(1, {{"b", jag_b}, {"a", FlatArray::of_f64({1.0})}});
    CHECK(code_of([&] { write_file(path, schema, {reordered}); }) ==
          ErrorCode::SchemaMismatch);

    EventTable wrong_dtype(1, {{"a", FlatArray::of_i64({1})}, {"b", jag_b}});
    CHECK(code_of([&] { write_file(path, schema, {wrong_dtype}); }) ==
          ErrorCode::SchemaMismatch);

    EventTable wrong_layout(
        1, {{"a", jag({{1.0}})}, {"b", jag_b}});
    CHECK(code_of([&] { write_file(path, schema, {wrong_layout}); }) ==
          ErrorCode::SchemaMismatch);

    CHECK(code_of([&] { write_file(path, {}, {}); }) == ErrorCode::EmptyFieldSet);
    CHECK(code_of([&] {
              write_file(path, {{"a", Dtype::F64, false}, {"a", Dtype::F64, false}}, {});
          }) == ErrorCode::DuplicateName);
    CHECK(code_of([&] { write_file(path, {{"2x", Dtype::F64, false}}, {}); }) ==
          ErrorCode::InvalidName);
}

TEST_CASE("a schema-only file holds zero events") {
    TempDir dir;
    auto path = dir.file("empty.cfpk");
    write_file(path, toy_schema(), {});
    CfpkReader reader(std::make_shared<LocalFile>(path));
    CHECK(reader.total_events() == 0);
    CHECK(reader.groups().empty());
    auto t = reader.read({"MET"}, 0, 0);
    CHECK(t.n_events() == 0);
}

TEST_CASE("corrupt containers are rejected with the right code") {
    TempDir dir;
    auto path = dir.file("toy.cfpk");
    generate_toy(path, 1, 20, 8);
    std::string raw = slurp(path);

    auto open_bytes = [&](std::string bytes) {
        auto p = dir.file("mut.cfpk");
        spit(p, bytes);
        CfpkReader r(std::make_shared<LocalFile>(p));
    };

    std::string bad = raw;
    bad[0] = 'X';
    CHECK(code_of([&] { open_bytes(bad); }) == ErrorCode::BadMagic);

    bad = raw;
    bad[4] = '\x02';  // version 2
    CHECK(code_of([&] { open_bytes(bad); }) == ErrorCode::UnsupportedVersion);

    CHECK(code_of([&] { open_bytes(raw.substr(0, 10)); }) == ErrorCode::BadMagic);

    bad = raw;
    bad[20] = '!';  // garbage inside the header JSON
    CHECK(code_of([&] { open_bytes(bad); }) == ErrorCode::MalformedHeader);

    bad = raw;
    bad[8] = '\xFF';  // header length overruns the file
    bad[9] = '\xFF';
    CHECK(code_of([&] { open_bytes(bad); }) == ErrorCode::MalformedHeader);

    CHECK(code_of([&] { open_bytes(raw.substr(0, raw.size() - 5)); }) ==
          ErrorCode::MalformedHeader);  // body truncated

    CHECK(code_of([&] { open_bytes(raw + "junk"); }) == ErrorCode::MalformedHeader);

    CHECK(code_of([&] { CfpkReader r(std::make_shared<LocalFile>(dir.file("nope.cfpk"))); }) ==
          ErrorCode::IoError);
}

TEST_CASE("unknown columns and bad ranges fail cleanly") {
    TempDir dir;
    auto path = dir.file("toy.cfpk");
    generate_toy(path, 5, 50, 16);
    CfpkReader reader(std::make_shared<LocalFile>(path));

    CHECK(code_of([&] { reader.read({"Muon.mass"}, 0, 10); }) == ErrorCode::UnknownColumn);
    CHECK(code_of([&] { reader.read({"MET"}, -1, 10); }) == ErrorCode::RangeOutOfBounds);
    CHECK(code_of([&] { reader.read({"MET"}, 0, 51); }) == ErrorCode::RangeOutOfBounds);
    CHECK(code_of([&] { reader.read({"MET"}, 30, 20); }) == ErrorCode::RangeOutOfBounds);
    CHECK_NOTHROW(reader.read({"MET"}, 50, 50));
}

TEST_CASE("the toy sample follows its documented distributions") {
    TempDir dir;
    auto path = dir.file("toy.cfpk");
    generate_toy(path, 2024, 600, 250);

    auto schema = read_schema(path);
    REQUIRE(schema.size() == 5);
    CHECK(schema[0].name == "Muon.pt");
    CHECK(schema[1].name == "Muon.eta");
    CHECK(schema[2].name == "Muon.phi");
    CHECK(schema[3].name == "Muon.charge");
    CHECK(schema[4].name == "MET");
    CHECK(schema[3].dtype == Dtype::I64);
    CHECK(schema[4].jagged == false);
    for (int i = 0; i < 4; ++i) CHECK(schema[i].jagged == true);

    auto t = read_columns(path, {"Muon.pt", "Muon.eta", "Muon.phi", "Muon.charge", "MET"}, 0,
                          600);
    const auto& pt = std::get<JaggedArray>(t.column("Muon.pt"));
    const auto& eta = std::get<JaggedArray>(t.column("Muon.eta"));
    const auto& phi = std::get<JaggedArray>(t.column("Muon.phi"));
    const auto& charge = std::get<JaggedArray>(t.column("Muon.charge"));
    const auto& met = std::get<FlatArray>(t.column("MET"));

    const double pi = 3.14159265358979323846;
    bool saw_multi = false;
    for (std::int64_t e = 0; e < 600; ++e) {
        CHECK(pt.count(e) >= 0);
        CHECK(pt.count(e) <= 4);
        if (pt.count(e) >= 2) saw_multi = true;
        CHECK(met.f64()[e] >= 0.0);
        CHECK(met.f64()[e] < 200.0);
    }
    CHECK(saw_multi);
    for (std::int64_t i = 0; i < pt.content().size(); ++i) {
        CHECK(pt.content().f64()[i] >= 15.0);
        CHECK(pt.content().f64()[i] < 95.0);
        CHECK(eta.content().f64()[i] >= -2.4);
        CHECK(eta.content().f64()[i] < 2.4);
        CHECK(phi.content().f64()[i] >= -pi);
        CHECK(phi.content().f64()[i] < pi);
        bool unit = charge.content().i64()[i] == 1 || charge.content().i64()[i] == -1;
        CHECK(unit);
    }
}

TEST_CASE("the toy stream reproduces an independent transcription exactly") {
    TempDir dir;
    auto path = dir.file("toy.cfpk");
    generate_toy(path, 31415, 120, 50);  // three groups: 50, 50, 20

    CfpkReader reader(std::make_shared<LocalFile>(path));
    REQUIRE(reader.groups().size() == 3);
    CHECK(reader.groups()[0].n_events == 50);
    CHECK(reader.groups()[2].n_events == 20);

    auto t = reader.read({"Muon.pt", "Muon.eta", "Muon.phi", "Muon.charge", "MET"}, 0, 120);
    RefToy ref = ref_toy(31415, 120);

    const auto& pt = std::get<JaggedArray>(t.column("Muon.pt"));
    REQUIRE(pt.size() == 120);
    for (std::int64_t e = 0; e < 120; ++e) CHECK(pt.count(e) == ref.counts[e]);
    CHECK(vec_f64(pt.content()) == ref.pt);
    CHECK(vec_f64(std::get<JaggedArray>(t.column("Muon.eta")).content()) == ref.eta);
    CHECK(vec_f64(std::get<JaggedArray>(t.column("Muon.phi")).content()) == ref.phi);
    CHECK(vec_i64(std::get<JaggedArray>(t.column("Muon.charge")).content()) == ref.charge);
    CHECK(vec_f64(std::get<FlatArray>(t.column("MET"))) == ref.met);
}

TEST_CASE("manifests keep dataset order and resolve relative paths") {
    std::string text = R"({"datasets": {"zee": ["z1.cfpk", "z2.cfpk"], "apollo": ["/abs/a.cfpk"]}})";
    Manifest m = parse_manifest(text, "/data");
    REQUIRE(m.datasets.size() == 2);
    CHECK(m.datasets[0].first == "zee");
    CHECK(m.datasets[1].first == "apollo");
    CHECK(m.datasets[0].second[0] == "/data/z1.cfpk");
    CHECK(m.datasets[0].second[1] == "/data/z2.cfpk");
    CHECK(m.datasets[1].second[0] == "/abs/a.cfpk");

    CHECK(code_of([&] { parse_manifest("[]", ""); }) == ErrorCode::MalformedPayload);
    CHECK(code_of([&] { parse_manifest(R"({"datasets": {}})", ""); }) ==
          ErrorCode::MalformedPayload);
    CHECK(code_of([&] { parse_manifest(R"({"datasets": {"d": []}})", ""); }) ==
          ErrorCode::MalformedPayload);
    CHECK(code_of([&] { parse_manifest(R"({"datasets": {"d": [3]}})", ""); }) ==
          ErrorCode::MalformedPayload);
    CHECK(code_of([&] { parse_manifest("not json", ""); }) == ErrorCode::MalformedPayload);
}

TEST_CASE("chunk planning partitions files deterministically") {
    TempDir dir;
    generate_toy(dir.file("a.cfpk"), 1, 10, 100);
    generate_toy(dir.file("b.cfpk"), 2, 7, 100);
    generate_toy(dir.file("c.cfpk"), 3, 4, 100);

    Manifest m;
    m.datasets.push_back({"one", {dir.file("a.cfpk"), dir.file("b.cfpk")}});
    m.datasets.push_back({"two", {dir.file("c.cfpk")}});

    auto items = plan_chunks(m, 4);
    REQUIRE(items.size() == 6);
    // a: [0,4) [4,8) [8,10); b: [0,4) [4,7); c: [0,4)
    CHECK(items[0].dataset == "one");
    CHECK(items[0].file == dir.file("a.cfpk"));
    CHECK(items[0].entry_start == 0);
    CHECK(items[0].entry_stop == 4);
    CHECK(items[1].entry_start == 4);
    CHECK(items[1].entry_stop == 8);
    CHECK(items[2].entry_start == 8);
    CHECK(items[2].entry_stop == 10);
    CHECK(items[3].file == dir.file("b.cfpk"));
    CHECK(items[3].entry_stop == 4);
    CHECK(items[4].entry_stop == 7);
    CHECK(items[5].dataset == "two");
    CHECK(items[5].entry_start == 0);
    CHECK(items[5].entry_stop == 4);
    for (std::size_t i = 0; i < items.size(); ++i)
        CHECK(items[i].chunk_index == static_cast<std::int64_t>(i));

    auto one_chunk = plan_chunks(m, 1000);
    REQUIRE(one_chunk.size() == 3);
    CHECK(one_chunk[0].entry_stop == 10);

    CHECK(code_of([&] { plan_chunks(m, 0); }) == ErrorCode::NegativeCount);
}

TEST_CASE("chunk plans cover every event exactly once") {
    TempDir dir;
    std::mt19937_64 pick(7);
    for (int trial = 0; trial < 10; ++trial) {
        Manifest m;
        std::vector<std::int64_t> sizes;
        int nfiles = 1 + static_cast<int>(pick() % 4);
        std::vector<std::string> files;
        for (int f = 0; f < nfiles; ++f) {
            std::int64_t n = static_cast<std::int64_t>(pick() % 40);
            sizes.push_back(n);
            auto path = dir.file("t" + std::to_string(trial) + "_" + std::to_string(f) +
                                 ".cfpk");
            generate_toy(path, pick(), n, 16);
            files.push_back(path);
        }
        m.datasets.push_back({"d", files});
        std::int64_t target = 1 + static_cast<std::int64_t>(pick() % 12);

        auto items = plan_chunks(m, target);
        std::size_t at = 0;
        for (int f = 0; f < nfiles; ++f) {
            std::int64_t covered = 0;
            while (at < items.size() && items[at].file == files[f]) {
                CHECK(items[at].entry_start == covered);
                CHECK(items[at].entry_stop > items[at].entry_start);
                CHECK(items[at].entry_stop - items[at].entry_start <= target);
                covered = items[at].entry_stop;
                ++at;
            }
            CHECK(covered == sizes[f]);
        }
        CHECK(at == items.size());
        for (std::size_t i = 0; i < items.size(); ++i)
            CHECK(items[i].chunk_index == static_cast<std::int64_t>(i));
    }
}

TEST_CASE("load_manifest reads from disk relative to itself") {
    TempDir dir;
    generate_toy(dir.file("x.cfpk"), 4, 5, 10);
    spit(dir.file("m.json"), R"({"datasets": {"solo": ["x.cfpk"]}})");
    Manifest m = load_manifest(dir.file("m.json"));
    REQUIRE(m.datasets.size() == 1);
    auto items = plan_chunks(m, 3);
    REQUIRE(items.size() == 2);
    CHECK(items[1].entry_stop == 5);
    CHECK(code_of([&] { load_manifest(dir.file("missing.json")); }) == ErrorCode::IoError);
}
