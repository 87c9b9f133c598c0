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

#include <maxent/pipeline.hpp>
#include <maxent/query.hpp>
#include <maxent/serialize.hpp>
#include <maxent/synthetic.hpp>

#include <gtest/gtest.h>
#include "json.hpp"

#include <filesystem>
#include <random>

using namespace maxent;
using namespace maxent::testing;

namespace {

Summary small_summary() {
    auto ds = make_synthetic({.rows = 3000, .seed = 11});
    BuildConfig cfg;
    cfg.selection.stat_budget = 12;
    return build_summary(ds, cfg);
}

}  // namespace

TEST(Serialize, RoundTripIsBitExact) {
    auto s = small_summary();
    auto doc = serialize_summary(s);
    auto back = load_summary(doc);
    ASSERT_EQ(back.alpha().size(), s.alpha().size());
    for (std::size_t j = 0; j < s.alpha().size(); ++j) EXPECT_EQ(back.alpha()[j], s.alpha()[j]) << j;
    EXPECT_EQ(back.n(), s.n());
    EXPECT_EQ(back.statistics().size(), s.statistics().size());
    EXPECT_EQ(back.statistics().groups().size(), s.statistics().groups().size());
    EXPECT_EQ(back.diagnostics().sweeps, s.diagnostics().sweeps);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto q = random_predicate(rng, s.schema());
        EXPECT_EQ(answer_count(back, q).expectation, answer_count(s, q).expectation);
    }
    EXPECT_EQ(serialize_summary(back), doc);
}

TEST(Serialize, RejectsBadDocuments) {
    auto doc = serialize_summary(small_summary());
    EXPECT_THROW(load_summary(doc.substr(0, doc.size() / 2)), FormatError);
    EXPECT_THROW(load_summary("{}"), FormatError);
    EXPECT_THROW(load_summary("[1,2]"), FormatError);
    auto j = nlohmann::json::parse(doc);
    j["version"] = 99;
    EXPECT_THROW(load_summary(j.dump()), FormatError);
    j = nlohmann::json::parse(doc);
    j.erase("polynomial");
    EXPECT_THROW(load_summary(j.dump()), FormatError);
}

TEST(Serialize, FileRoundTrip) {
    auto s = small_summary();
    auto path = std::filesystem::temp_directory_path() / "maxent_serialize_test.json";
    save_summary_file(s, path);
    auto back = load_summary_file(path);
    EXPECT_EQ(back.alpha(), s.alpha());
    std::filesystem::remove(path);
    EXPECT_THROW(load_summary_file(path), FormatError);
}

TEST(Serialize, SchemaJson) {
    auto s = small_summary();
    auto j = nlohmann::json::parse(summary_schema_json(s));
    EXPECT_EQ(j["n"].get<double>(), 3000.0);
    ASSERT_EQ(j["attributes"].size(), 4u);
    EXPECT_EQ(j["attributes"][0]["domain"].size(), 32u);
    EXPECT_EQ(j["pairs"].size(), s.statistics().groups().size());
    EXPECT_EQ(j["statistics"].get<std::size_t>(), s.statistics().size());
}

TEST(Serialize, HandBuiltExample) {
    auto schema = abc_binary_schema();
    auto stats = example_multi(schema);
    Summary s(schema, stats, 10.0);
    solve(s, {.threshold = 1e-10, .max_sweeps = 5000});
    auto back = load_summary(serialize_summary(s));
    EXPECT_EQ(back.alpha(), s.alpha());
    EXPECT_EQ(back.evaluator().value(), s.evaluator().value());
}
