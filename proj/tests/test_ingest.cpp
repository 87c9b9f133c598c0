/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include "fixtures.hpp"

#include <maxent/ingest.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace maxent;
using namespace maxent::testing;

namespace {

SchemaConfig abc_config() {
    return parse_schema_config(R"({"attributes": [
        {"name": "A", "kind": "categorical", "domain": ["a1", "a2"]},
        {"name": "B", "kind": "categorical", "domain": ["b1", "b2"]},
        {"name": "C", "kind": "categorical", "domain": ["c1", "c2"]}]})");
}

const char* kExampleCsv =
    "A,B,C\n"
    "a1,b2,c2\na1,b1,c2\na1,b1,c2\na2,b2,c1\na2,b1,c1\n"
    "a2,b1,c1\na2,b1,c1\na2,b1,c1\na2,b1,c1\na2,b1,c2\n";

Dataset load(const std::string& text, const SchemaConfig& cfg, IngestReport* rep = nullptr) {
    std::istringstream in(text);
    auto r = read_csv(in, cfg);
    if (rep) *rep = r.report;
    return std::move(r.dataset);
}

}  // namespace

TEST(Csv, ExampleInstance) {
    auto ds = load(kExampleCsv, abc_config());
    EXPECT_EQ(ds.size(), 10u);
    EXPECT_EQ(ds.row(0), (std::vector<ValueIndex>{0, 1, 1}));
}

TEST(Csv, BadRowIsDropped) {
    IngestReport rep;
    auto ds = load("A,B,C\na1,b1,c1\na1,,c1\na2,b2,c2\na2,b1,c1\n", abc_config(), &rep);
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(rep.dropped, 1u);
    EXPECT_EQ(rep.rows_read, 4u);
}

TEST(Csv, EmptyBody) {
    EXPECT_EQ(load("A,B,C\n", abc_config()).size(), 0u);
    EXPECT_EQ(load("", abc_config()).size(), 0u);
}

TEST(Csv, MissingColumnIsConfigError) {
    EXPECT_THROW(load("A,B\na1,b1\n", abc_config()), ConfigError);
}

TEST(Csv, QuotedFieldsAndExtraColumns) {
    auto cfg = parse_schema_config(R"({"attributes": [{"name": "city", "domain": ["Portland, OR", "Seattle"]}]})");
    auto ds = load("id,city\n1,\"Portland, OR\"\n2,Seattle\n3,\"Seat\"\"tle\"\n", cfg);
    EXPECT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.at(0, 0), 0u);
    EXPECT_EQ(ds.at(1, 0), 1u);
}

TEST(Csv, InfersNumericBoundsAndClamps) {
    auto cfg = parse_schema_config(R"({"attributes": [{"name": "x", "kind": "numeric", "buckets": 4}]})");
    auto ds = load("x\n0\n10\n20\n40\n", cfg);
    ASSERT_EQ(ds.size(), 4u);
    EXPECT_EQ(ds.schema()[0].bucketizer().min, 0.0);
    EXPECT_EQ(ds.schema()[0].bucketizer().max, 40.0);
    EXPECT_EQ(ds.at(0, 0), 0u);
    EXPECT_EQ(ds.at(3, 0), 3u);
    IngestReport rep;
    auto fixed = parse_schema_config(R"({"attributes": [{"name": "x", "kind": "numeric", "min": 0, "max": 10, "buckets": 2}]})");
    auto ds2 = load("x\n-3\n4\n99\n", fixed, &rep);
    EXPECT_EQ(ds2.size(), 3u);
    EXPECT_EQ(rep.clamped, 2u);
}

TEST(Csv, InfersCategoricalWithTopK) {
    auto cfg = parse_schema_config(R"({"attributes": [{"name": "c", "top_k": 2, "overflow": "Other"}]})");
    auto ds = load("c\nx\nx\nx\ny\ny\nz\n", cfg);
    const auto& meta = ds.schema()[0];
    ASSERT_EQ(meta.size(), 3u);
    EXPECT_EQ(meta.label(2), "Other");
    EXPECT_EQ(ds.at(5, 0), 2u);
}

TEST(Csv, FileRoundTrip) {
    auto path = std::filesystem::temp_directory_path() / "maxent_ingest_test.csv";
    {
        std::ofstream out(path);
        out << kExampleCsv;
    }
    auto r = load_csv(path, abc_config());
    EXPECT_EQ(r.dataset.size(), 10u);
    std::filesystem::remove(path);
}

TEST(SchemaConfig, JsonRoundTrip) {
    auto cfg = parse_schema_config(R"({"attributes": [
        {"name": "x", "kind": "numeric", "min": 0, "max": 100, "buckets": 10},
        {"name": "c", "domain": ["SEA", "PDX"], "overflow": "Other"}]})");
    auto again = parse_schema_config(schema_config_to_json(cfg));
    ASSERT_EQ(again.attributes.size(), 2u);
    EXPECT_EQ(again.attributes[0].kind, AttributeKind::numeric);
    EXPECT_EQ(*again.attributes[0].max, 100.0);
    EXPECT_EQ(again.attributes[0].buckets, 10u);
    EXPECT_EQ(*again.attributes[1].overflow_label, "Other");
    auto schema = resolve_schema(again);
    EXPECT_EQ(schema[1].size(), 3u);
    auto back = resolve_schema(schema_to_config(schema));
    EXPECT_EQ(back[1].labels(), schema[1].labels());
    EXPECT_THROW(parse_schema_config("{\"attributes\": 3}"), ConfigError);
}

TEST(OneD, ExampleCounts) {
    auto stats = compute_1d_statistics(example_dataset());
    const double expect[3][2] = {{3, 7}, {8, 2}, {6, 4}};
    for (AttrId a = 0; a < 3; ++a)
        for (ValueIndex v = 0; v < 2; ++v) EXPECT_EQ(stats[stats.one_d_stat(a, v)].target, expect[a][v]);
}

TEST(OneD, EmptyDatasetAndSums) {
    Dataset empty(abc_binary_schema());
    auto s0 = compute_1d_statistics(empty);
    for (const auto& st : s0.all()) EXPECT_EQ(st.target, 0.0);
    std::mt19937_64 rng(5);
    auto schema = numbered_schema(3, 6);
    auto ds = random_dataset(rng, schema, 300);
    auto s = compute_1d_statistics(ds);
    for (AttrId a = 0; a < 3; ++a) {
        double total = 0;
        for (auto j : s.one_d(a)) total += s[j].target;
        EXPECT_EQ(total, 300.0);
    }
}

TEST(Contingency, ExamplePairAB) {
    auto m = contingency_matrix(example_dataset(), 0, 1);
    EXPECT_EQ(m.original(), CountMatrix::from_rows({{2, 1}, {6, 1}}));
    EXPECT_EQ(m.total(), 10.0);
    auto z = contingency_matrix(Dataset(abc_binary_schema()), 0, 1);
    EXPECT_EQ(z.total(), 0.0);
}

TEST(Contingency, MarginalsMatchOneD) {
    std::mt19937_64 rng(9);
    auto schema = numbered_schema(3, 5);
    auto ds = random_dataset(rng, schema, 500);
    auto s = compute_1d_statistics(ds);
    auto m = contingency_matrix(ds, 0, 2);
    for (std::size_t x = 0; x < m.rows(); ++x) {
        double row = 0;
        for (std::size_t y = 0; y < m.cols(); ++y) row += m.original()(x, y);
        EXPECT_EQ(row, s[s.one_d_stat(0, static_cast<ValueIndex>(x))].target);
    }
    for (std::size_t y = 0; y < m.cols(); ++y) {
        double col = 0;
        for (std::size_t x = 0; x < m.rows(); ++x) col += m.original()(x, y);
        EXPECT_EQ(col, s[s.one_d_stat(2, static_cast<ValueIndex>(y))].target);
    }
}

TEST(Contingency, PermutationsAreValidated) {
    auto m = contingency_matrix(example_dataset(), 0, 1);
    EXPECT_THROW(m.set_permutations({0, 0}, {0, 1}), std::invalid_argument);
    m.set_permutations({1, 0}, {0, 1});
    EXPECT_EQ(m(0, 0), 6.0);
    EXPECT_EQ(m.view(), CountMatrix::from_rows({{6, 1}, {2, 1}}));
}

TEST(ChiSquared, Examples) {
    EXPECT_DOUBLE_EQ(chi_squared(CountMatrix::from_rows({{5, 5}, {5, 5}})), 0.0);
    EXPECT_DOUBLE_EQ(chi_squared(CountMatrix::from_rows({{10, 0}, {0, 10}})), 20.0);
    EXPECT_DOUBLE_EQ(chi_squared(CountMatrix::from_rows({{3, 4, 1}, {0, 0, 0}})), 0.0);
    EXPECT_EQ(chi_squared(CountMatrix(2, 2)), 0.0);
}

TEST(ChiSquared, PermutationInvariant) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        CountMatrix m(4, 5);
        for (std::size_t x = 0; x < 4; ++x)
            for (std::size_t y = 0; y < 5; ++y) m(x, y) = static_cast<double>(rng() % 20);
        std::vector<std::size_t> rp = {0, 1, 2, 3}, cp = {0, 1, 2, 3, 4};
        std::shuffle(rp.begin(), rp.end(), rng);
        std::shuffle(cp.begin(), cp.end(), rng);
        EXPECT_NEAR(chi_squared(m), chi_squared(m.permuted(rp, cp)), 1e-9 * (1 + chi_squared(m)));
    }
}

TEST(StatisticsDump, ListsEveryStatistic) {
    auto schema = abc_binary_schema();
    auto stats = example_multi(schema);
    auto text = statistics_dump_json(stats, schema);
    EXPECT_NE(text.find("\"statistics\""), std::string::npos);
    EXPECT_NE(text.find("b2"), std::string::npos);
}
