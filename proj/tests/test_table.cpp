#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colex/table.hpp"

#include <random>

using namespace colex;

namespace {

JaggedArray jag(const std::vector<std::vector<double>>& rows) {
    std::vector<std::int64_t> offsets{0};
    std::vector<double> content;
    for (const auto& r : rows) {
        content.insert(content.end(), r.begin(), r.end());
        offsets.push_back(static_cast<std::int64_t>(content.size()));
    }
    return JaggedArray(std::move(offsets), FlatArray::of_f64(std::move(content)));
}

std::vector<std::vector<double>> rows_of(const JaggedArray& j) {
    auto offs = j.offsets();
    auto v = j.content().f64();
    std::vector<std::vector<double>> out;
    for (std::int64_t e = 0; e + 1 < static_cast<std::int64_t>(offs.size()); ++e)
        out.emplace_back(v.begin() + offs[e], v.begin() + offs[e + 1]);
    return out;
}

template <typename F>
ErrorCode code_of(F f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("a table holds flat and jagged columns over the same events") {
    auto t = table_from_columns(
        {{"nMuon", FlatArray::of_i64({2, 1})}, {"Muon.pt", jag({{30, 40}, {50}})}}, 2);
    CHECK(t.n_events() == 2);
    CHECK(t.has_column("nMuon"));
    CHECK(t.has_column("Muon.pt"));
    CHECK_FALSE(t.has_column("met"));
    CHECK(column_dtype(t.column("nMuon")) == Dtype::I64);
    CHECK(code_of([&] { t.column("met"); }) == ErrorCode::UnknownColumn);
}

TEST_CASE("tables reject wrong lengths, duplicate names, and bad names") {
    CHECK(code_of([] {
              table_from_columns({{"x", FlatArray::of_f64({1.0})}}, 2);
          }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] {
              table_from_columns({{"j", jag({{1}, {2}, {3}})}}, 2);
          }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] {
              table_from_columns(
                  {{"x", FlatArray::of_f64({1.0})}, {"x", FlatArray::of_f64({2.0})}}, 1);
          }) == ErrorCode::DuplicateName);
    CHECK(code_of([] {
              table_from_columns({{"", FlatArray::of_f64({1.0})}}, 1);
          }) == ErrorCode::InvalidName);
    CHECK(code_of([] {
              table_from_columns({{"2x", FlatArray::of_f64({1.0})}}, 1);
          }) == ErrorCode::InvalidName);
    CHECK(code_of([] {
              table_from_columns({{"a b", FlatArray::of_f64({1.0})}}, 1);
          }) == ErrorCode::InvalidName);
    // dots are the one separator allowed
    CHECK_NOTHROW(table_from_columns({{"Muon.pt", jag({{1.0}})}}, 1));
}

TEST_CASE("with_column attaches a derived column and leaves the old table alone") {
    auto t = table_from_columns({{"met", FlatArray::of_f64({7, 8})}}, 2);
    auto t2 = t.with_column("mass", FlatArray::of_f64({91, 90}));
    CHECK(t2.has_column("mass"));
    CHECK_FALSE(t.has_column("mass"));
    CHECK(t.columns().size() == 1);
    CHECK(t2.columns().size() == 2);

    // replacing keeps position and does not disturb the original
    auto t3 = t2.with_column("mass", FlatArray::of_f64({1, 2}));
    CHECK(std::get<FlatArray>(t3.column("mass")).f64()[0] == 1.0);
    CHECK(std::get<FlatArray>(t2.column("mass")).f64()[0] == 91.0);
    CHECK(t3.columns()[1].first == "mass");

    CHECK(code_of([&] { t.with_column("bad", FlatArray::of_f64({1.0})); }) ==
          ErrorCode::LengthMismatch);
}

TEST_CASE("selecting events applies the same mask to every column") {
    auto t = table_from_columns({{"met", FlatArray::of_f64({7, 8, 9})},
                                 {"Muon.pt", jag({{1, 2}, {}, {3}})}},
                                3);
    auto mask = FlatArray::of_bool({1, 0, 1});
    auto s = select_events(t, mask);
    CHECK(s.n_events() == 2);

    // property: whole-table selection equals per-column selection
    for (const auto& [name, col] : t.columns()) {
        if (const auto* f = std::get_if<FlatArray>(&col))
            CHECK(column_equals(s.column(name), Column(select_events(*f, mask))));
        else
            CHECK(column_equals(s.column(name),
                                Column(select_events(std::get<JaggedArray>(col), mask))));
    }
}

TEST_CASE("zip demands at least one field and a common structure") {
    auto pt = jag({{30, 40}, {50}});
    auto eta = jag({{0.1, -1.0}, {2.0}});
    auto c = zip_collection("muons", {{"pt", pt}, {"eta", eta}});
    CHECK(c.name() == "muons");
    CHECK(c.size() == 2);
    CHECK(c.field("pt").equals(pt));
    CHECK(c.field("eta").equals(eta));
    CHECK(code_of([&] { c.field("phi"); }) == ErrorCode::UnknownColumn);

    CHECK(code_of([] { zip_collection("empty", {}); }) == ErrorCode::EmptyFieldSet);
    CHECK(code_of([&] {
              zip_collection("bad", {{"pt", pt}, {"eta", jag({{0.1}, {2.0, 3.0}})}});
          }) == ErrorCode::StructureMismatch);
    CHECK(code_of([&] { zip_collection("dup", {{"pt", pt}, {"pt", eta}}); }) ==
          ErrorCode::DuplicateName);

    // single-field zip round-trips the array
    auto one = zip_collection("solo", {{"pt", pt}});
    CHECK(one.field("pt").equals(pt));
}

TEST_CASE("masking a collection keeps every field on one shared structure") {
    auto pt = jag({{30, 10, 40}, {5}, {25, 60}});
    auto eta = jag({{0.1, 1.0, -2.0}, {0.5}, {1.5, -0.3}});
    auto q = jag({{1, -1, 1}, {-1}, {1, 1}});
    auto c = zip_collection("muons", {{"pt", pt}, {"eta", eta}, {"q", q}});

    auto mask = elementwise(BinaryOp::Gt, pt, Scalar::of_f64(20.0));
    auto kept = mask_collection(c, mask);

    CHECK(rows_of(kept.field("pt")) == std::vector<std::vector<double>>{{30, 40}, {}, {25, 60}});
    CHECK(rows_of(kept.field("eta")) ==
          std::vector<std::vector<double>>{{0.1, -2.0}, {}, {1.5, -0.3}});
    CHECK(rows_of(kept.field("q")) == std::vector<std::vector<double>>{{1, 1}, {}, {1, 1}});

    // one offsets sequence behind all fields, physically
    CHECK(kept.field("pt").offsets().data() == kept.field("eta").offsets().data());
    CHECK(kept.field("pt").offsets().data() == kept.field("q").offsets().data());

    // per-field loop oracle
    auto prow = rows_of(pt), erow = rows_of(eta);
    for (std::size_t e = 0; e < prow.size(); ++e) {
        std::vector<double> want;
        for (std::size_t k = 0; k < prow[e].size(); ++k)
            if (prow[e][k] > 20.0) want.push_back(erow[e][k]);
        CHECK(rows_of(kept.field("eta"))[e] == want);
    }

    // all-true mask changes nothing
    auto all = mask_collection(c, elementwise(BinaryOp::Gt, pt, Scalar::of_f64(-1.0)));
    CHECK(all.field("pt").equals(pt));
    CHECK(all.field("eta").equals(eta));

    CHECK(code_of([&] { mask_collection(c, jag({{1}, {1}, {1}})); }) == ErrorCode::TypeMismatch);
}

TEST_CASE("collections can drop whole events") {
    auto pt = jag({{30, 40}, {50}, {}});
    auto eta = jag({{0.1, -1.0}, {2.0}, {}});
    auto c = zip_collection("muons", {{"pt", pt}, {"eta", eta}});
    auto s = select_events(c, FlatArray::of_bool({0, 1, 1}));
    CHECK(s.size() == 2);
    CHECK(rows_of(s.field("pt")) == std::vector<std::vector<double>>{{50}, {}});
    CHECK(s.field("pt").offsets().data() == s.field("eta").offsets().data());
}

TEST_CASE("gathering pair legs keeps fields aligned") {
    auto pt = jag({{1, 2, 3}});
    auto q = jag({{10, 20, 30}});
    auto c = zip_collection("muons", {{"pt", pt}, {"q", q}});
    auto [li, ri] = distinct_pairs(pt);
    auto lhs = gather_fields(c, li, "lead");
    auto rhs = gather_fields(c, ri, "trail");
    CHECK(rows_of(lhs.field("pt")) == std::vector<std::vector<double>>{{1, 1, 2}});
    CHECK(rows_of(rhs.field("pt")) == std::vector<std::vector<double>>{{2, 3, 3}});
    CHECK(rows_of(lhs.field("q")) == std::vector<std::vector<double>>{{10, 10, 20}});
    CHECK(rows_of(rhs.field("q")) == std::vector<std::vector<double>>{{20, 30, 30}});
    CHECK(lhs.field("pt").offsets().data() == lhs.field("q").offsets().data());
}

TEST_CASE("dotted columns group into a collection in table order") {
    auto t = table_from_columns({{"met", FlatArray::of_f64({7})},
                                 {"Muon.pt", jag({{30, 40}})},
                                 {"Muon.eta", jag({{0.1, 0.2}})},
                                 {"Jet.pt", jag({{99}})}},
                                1);
    auto muons = collection_from_table(t, "Muon");
    CHECK(muons.fields().size() == 2);
    CHECK(muons.fields()[0].first == "pt");
    CHECK(muons.fields()[1].first == "eta");
    CHECK(muons.field("pt").count(0) == 2);

    auto jets = collection_from_table(t, "Jet");
    CHECK(jets.fields().size() == 1);

    CHECK(code_of([&] { collection_from_table(t, "Electron"); }) == ErrorCode::EmptyFieldSet);

    auto bad = t.with_column("Tau.pt", FlatArray::of_f64({5}));
    CHECK(code_of([&] { collection_from_table(bad, "Tau"); }) == ErrorCode::TypeMismatch);
}

TEST_CASE("an event-then-object cut gives the same result as object-then-event") {
    // the two orders commute when the event cut does not depend on the object cut
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> count(0, 4);
    std::uniform_real_distribution<double> val(0.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> rows(6);
        std::vector<std::uint8_t> evmask;
        for (auto& r : rows) {
            for (int i = 0, k = count(rng); i < k; ++i) r.push_back(val(rng));
        }
        for (std::size_t e = 0; e < rows.size(); ++e)
            evmask.push_back(e % 2 == 0 ? 1 : 0);

        auto pt = jag(rows);
        auto c = zip_collection("m", {{"pt", pt}});
        auto em = FlatArray::of_bool(evmask);

        auto a = mask_collection(select_events(c, em),
                                 elementwise(BinaryOp::Gt, select_events(pt, em),
                                             Scalar::of_f64(25.0)));
        auto b = select_events(
            mask_collection(c, elementwise(BinaryOp::Gt, pt, Scalar::of_f64(25.0))), em);
        CHECK(a.field("pt").equals(b.field("pt")));
    }
}
