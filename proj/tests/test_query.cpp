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

#include <maxent/expanded.hpp>
#include <maxent/query.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace maxent;
using namespace maxent::testing;

namespace {

Summary solved_example_one() {
    auto schema = abc_binary_schema();
    Summary s(schema, example_one_d(schema), 10);
    solve(s);
    return s;
}

Summary solved_random(std::mt19937_64& rng) {
    auto rc = random_config(rng, true);
    auto ds = random_dataset(rng, rc.schema, 60);
    Summary s(rc.schema, restate(rc.stats, rc.schema, ds), 60);
    SolverConfig cfg;
    cfg.max_sweeps = 50;
    solve(s, cfg);
    return s;
}

Summary uniform_two_attr(std::uint32_t n_values, double n) {
    auto schema = numbered_schema(2, n_values);
    StatisticSet st(schema);
    for (AttrId a = 0; a < 2; ++a)
        for (ValueIndex v = 0; v < n_values; ++v) st.add_one_d(a, v, n / n_values);
    Summary s(schema, st, n);
    solve(s);
    return s;
}

Predicate point_pred(std::span<const ValueIndex> t) {
    Predicate p(t.size());
    for (AttrId a = 0; a < t.size(); ++a) p.set(a, Clause::point(t[a]));
    return p;
}

}  // namespace

TEST(Rounding, HalfUpClampedAtZero) {
    EXPECT_EQ(round_estimate(0.5), 1u);
    EXPECT_EQ(round_estimate(0.49), 0u);
    EXPECT_EQ(round_estimate(2.5), 3u);
    EXPECT_EQ(round_estimate(-3.0), 0u);
}

TEST(AnswerCount, UniformFlights) {
    auto s = uniform_two_attr(50, 500000);
    auto ans = answer_count(s, pred2(2, 0, 4, 1, 31));
    EXPECT_NEAR(ans.expectation, 200.0, 1e-9);
    EXPECT_EQ(ans.rounded, 200u);
}

TEST(AnswerCount, EverythingIsN) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        auto s = solved_random(rng);
        EXPECT_EQ(answer_count(s, Predicate(s.schema().size())).expectation, s.n());
    }
}

TEST(AnswerCount, RangeQueryZeroesOutsideValues) {
    auto ex = large_example(true);
    std::mt19937_64 rng(2);
    std::vector<double> alpha(ex.stats.size());
    for (auto& a : alpha) a = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
    Summary s(ex.schema, ex.stats, 1e6, BuildMethod::optimized);
    s.evaluator().assign(alpha);
    Predicate q(3);
    q.set(0, labels(36, 150)).set(2, labels(660, 834));
    auto zeroed = alpha;
    for (ValueIndex v = 0; v < 1000; ++v) {
        if (v < 35 || v >= 150) zeroed[ex.stats.one_d_stat(0, v)] = 0.0;
        if (v < 659 || v >= 834) zeroed[ex.stats.one_d_stat(2, v)] = 0.0;
    }
    const double expected = 1e6 * (s.evaluator().evaluate_with(zeroed) / s.evaluator().value());
    EXPECT_LE(rel_diff(answer_count(s, q).expectation, expected), 1e-12);
}

TEST(AnswerCount, MatchesExpandedOracle) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        auto s = solved_random(rng);
        auto e = build_expanded(s.statistics());
        for (int k = 0; k < 10; ++k) {
            auto q = random_predicate(rng, s.schema());
            const double truth = e.expectation(s.alpha(), q, s.n());
            EXPECT_NEAR(answer_count(s, q).expectation, truth, 1e-9 * std::max(1.0, truth));
        }
    }
}

TEST(AnswerCount, PartitionAdditivityAndMonotonicity) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        auto s = solved_random(rng);
        auto q = random_predicate(rng, s.schema());
        const double whole = answer_count(s, q).expectation;
        for (AttrId a = 0; a < s.schema().size(); ++a) {
            double parts = 0;
            for (ValueIndex v = 0; v < s.schema()[a].size(); ++v) {
                if (!q.clause(a).accepts(v)) continue;
                Predicate sub = q;
                sub.set(a, Clause::point(v));
                const double e = answer_count(s, sub).expectation;
                EXPECT_LE(e, whole + 1e-9);
                parts += e;
            }
            EXPECT_NEAR(parts, whole, 1e-9 * std::max(1.0, whole));
        }
    }
}

TEST(Derivatives, AgreeWithZeroSetting) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        auto s = solved_random(rng);
        std::vector<ValueIndex> t(s.schema().size());
        for (AttrId a = 0; a < t.size(); ++a) t[a] = static_cast<ValueIndex>(rng() % s.schema()[a].size());
        const double z = answer_count(s, point_pred(t)).expectation;
        EXPECT_NEAR(answer_point_via_derivatives(s, t), z, 1e-9 * std::max(1.0, z));
    }
}

TEST(Derivatives, ExampleOnePoint) {
    auto s = solved_example_one();
    const ValueIndex t[] = {0, 0, 0};
    EXPECT_NEAR(answer_point_via_derivatives(s, t), 1.44, 1e-6);
    auto z = s;
    auto a = z.alpha();
    a[z.statistics().one_d_stat(1, 0)] = 0.0;
    z.evaluator().assign(a);
    EXPECT_EQ(answer_point_via_derivatives(z, t), 0.0);
}

TEST(GroupBy, ExampleOneByA) {
    auto s = solved_example_one();
    GroupByQuery g;
    g.attributes = {0};
    auto rows = answer_groupby(s, g);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_NEAR(rows[0].answer.expectation, 3.0, 1e-6);
    EXPECT_NEAR(rows[1].answer.expectation, 7.0, 1e-6);
}

TEST(GroupBy, SumsToN) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        auto s = solved_random(rng);
        for (AttrId a = 0; a < s.schema().size(); ++a) {
            GroupByQuery g;
            g.attributes = {a};
            double total = 0;
            for (const auto& r : answer_groupby(s, g)) total += r.answer.expectation;
            EXPECT_NEAR(total, s.n(), 1e-9 * s.n());
        }
    }
}

TEST(GroupBy, NoAttributesGivesOneRow) {
    auto s = solved_example_one();
    auto rows = answer_groupby(s, GroupByQuery{});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].answer.expectation, 10.0);
}

TEST(GroupBy, CapAndFilterAndZeroRows) {
    auto s = uniform_two_attr(50, 100);
    GroupByQuery g;
    g.attributes = {0, 1};
    g.cap = 1000;
    try {
        answer_groupby(s, g);
        FAIL() << "expected QueryError";
    } catch (const QueryError& e) {
        EXPECT_NE(std::string(e.what()).find("2500"), std::string::npos);
    }
    g.cap = kDefaultGroupCap;
    g.filter = Predicate(2);
    g.filter.set(0, Clause::range(0, 2));
    auto rows = answer_groupby(s, g);
    EXPECT_EQ(rows.size(), 150u);
    g.include_zero_groups = false;
    EXPECT_TRUE(answer_groupby(s, g).empty());  // 100 / 2500 rounds to 0
    g.attributes = {0, 0};
    EXPECT_THROW(answer_groupby(s, g), QueryError);
}

TEST(Marginal, SingleTupleWorld) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        auto s = solved_random(rng);
        s.set_n(1.0);
        std::vector<ValueIndex> t(s.schema().size());
        for (AttrId a = 0; a < t.size(); ++a) t[a] = static_cast<ValueIndex>(rng() % s.schema()[a].size());
        EXPECT_NEAR(marginal_probability(s, t), answer_count(s, point_pred(t)).expectation, 1e-12);
    }
}

TEST(Marginal, ExampleOneAndZero) {
    auto s = solved_example_one();
    const ValueIndex t[] = {0, 0, 0};
    EXPECT_NEAR(marginal_probability(s, t), 1 - std::pow(1 - 0.144, 10), 1e-7);
    auto z = s;
    auto a = z.alpha();
    a[0] = 0.0;
    z.evaluator().assign(a);
    EXPECT_EQ(marginal_probability(z, t), 0.0);
}

TEST(Join, UniformModels) {
    auto l = uniform_two_attr(10, 400);
    auto r = uniform_two_attr(10, 50);
    const double est = answer_join_count(l, r, "B", Predicate(2), Predicate(2));
    EXPECT_NEAR(est, 400.0 * 50.0 / 10.0, 1e-9);
    Predicate one(2);
    one.set(1, Clause::point(3));
    EXPECT_NEAR(answer_join_count(l, r, "B", one, Predicate(2)), (400.0 / 10) * (50.0 / 10), 1e-9);
}

TEST(Join, ZeroFactorAndMismatch) {
    auto l = uniform_two_attr(4, 40);
    auto schema = numbered_schema(2, 4);
    StatisticSet st(schema);
    const double b_counts[] = {10, 0, 5, 5};
    for (ValueIndex v = 0; v < 4; ++v) st.add_one_d(0, v, 5);
    for (ValueIndex v = 0; v < 4; ++v) st.add_one_d(1, v, b_counts[v]);
    Summary r(schema, st, 20);
    solve(r);
    Predicate only(2);
    only.set(1, Clause::point(1));
    EXPECT_EQ(answer_join_count(l, r, "B", only, only), 0.0);
    auto other = uniform_two_attr(5, 40);
    EXPECT_THROW(answer_join_count(l, other, "B", Predicate(2), Predicate(2)), SchemaError);
    EXPECT_THROW(answer_join_count(l, r, "Z", Predicate(2), Predicate(2)), SchemaError);
}

TEST(QueryJson, ParseAndRoundTrip) {
    auto schema = numbered_schema(3, 1000);
    auto req = parse_query_json(schema, R"({"clauses": [{"attr": "A", "op": "range", "value": [36, 150]},
                                                       {"attr": "B", "op": "eq", "value": "7"},
                                                       {"attr": "C", "op": "in", "value": ["1", "3"]}],
                                           "groupBy": ["B"], "includeZeroGroups": false})");
    EXPECT_EQ(req.predicate.clause(0), Clause::range(35, 149));
    EXPECT_EQ(req.predicate.clause(1), Clause::point(6));
    EXPECT_EQ(req.predicate.clause(2), Clause::set({0, 2}));
    EXPECT_EQ(req.group_by, (std::vector<AttrId>{1}));
    EXPECT_FALSE(req.include_zero_groups);
    auto again = parse_query_json(schema, query_request_to_json(schema, req));
    EXPECT_EQ(again.predicate, req.predicate);
    EXPECT_EQ(again.group_by, req.group_by);
    EXPECT_EQ(parse_query_json(schema, "{}").predicate, Predicate(3));
}

TEST(QueryJson, Errors) {
    auto schema = abc_binary_schema();
    EXPECT_THROW(parse_query_json(schema, "{not json"), QueryError);
    EXPECT_THROW(parse_query_json(schema, "[1]"), QueryError);
    EXPECT_THROW(parse_query_json(schema, R"({"clauses": [{"attr": "A", "op": "eq", "value": "a1"},
                                                         {"attr": "A", "op": "eq", "value": "a2"}]})"),
                 QueryError);
    EXPECT_THROW(parse_query_json(schema, R"({"clauses": [{"attr": "A", "op": "eq", "value": "a9"}]})"), DomainError);
    EXPECT_THROW(parse_query_json(schema, R"({"clauses": [{"attr": "Q", "op": "eq", "value": "a1"}]})"), SchemaError);
    EXPECT_THROW(parse_query_json(schema, R"({"clauses": [{"attr": "A", "op": "like", "value": "a1"}]})"), QueryError);
}

TEST(QueryJson, AnswerShapes) {
    auto s = solved_example_one();
    auto a = answer_to_json(answer_count(s, Predicate(3)));
    EXPECT_NE(a.find("\"expectation\":10"), std::string::npos);
    EXPECT_NE(a.find("\"rounded\":10"), std::string::npos);
    GroupByQuery g;
    g.attributes = {1};
    auto rows = answer_groupby(s, g);
    auto text = groupby_to_json(s.schema(), g.attributes, rows, 1.0);
    EXPECT_NE(text.find("\"b2\""), std::string::npos);
    EXPECT_NE(text.find("\"rows\""), std::string::npos);
}
