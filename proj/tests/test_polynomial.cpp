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
#include <maxent/polynomial.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace maxent;
using namespace maxent::testing;

namespace {

using Key = std::vector<std::uint32_t>;
using Groups = std::vector<std::vector<StatId>>;

std::shared_ptr<const CompressedPolynomial> share(CompressedPolynomial p) {
    return std::make_shared<const CompressedPolynomial>(std::move(p));
}

double eval(const std::shared_ptr<const CompressedPolynomial>& p, const std::vector<double>& alpha) {
    return Evaluator(p, alpha).value();
}

// Hand-written factorization of the two-attribute-pair example.
double factored_example(const std::vector<double>& x) {
    const double a1 = x[0], a2 = x[1], b1 = x[2], b2 = x[3], c1 = x[4], c2 = x[5];
    const double ab11 = x[6] - 1, ab22 = x[7] - 1, bc11 = x[8] - 1, bc21 = x[9] - 1;
    return (a1 + a2) * (b1 + b2) * (c1 + c2) + (c1 + c2) * (a1 * b1 * ab11 + a2 * b2 * ab22) +
           (a1 + a2) * (b1 * c1 * bc11 + b2 * c1 * bc21) + a1 * b1 * c1 * ab11 * bc11 + a2 * b2 * c1 * ab22 * bc21;
}

std::vector<double> uniform_alpha(std::mt19937_64& rng, std::size_t k, double lo = 0.0, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> a(k);
    for (auto& v : a) v = u(rng);
    return a;
}

}  // namespace

TEST(Expanded, ExampleOneHasEightMonomials) {
    auto schema = abc_binary_schema();
    auto e = build_expanded(example_one_d(schema));
    ASSERT_EQ(e.size(), 8u);
    for (const auto& m : e.monomials()) EXPECT_EQ(m.stats.size(), 3u);
    std::vector<double> ones(6, 1.0);
    EXPECT_EQ(e.evaluate(ones), 8.0);
}

TEST(Expanded, ExampleTwoMonomialCarriesBothPairs) {
    auto schema = abc_binary_schema();
    auto e = build_expanded(example_multi(schema));
    const auto& first = e.monomials().front();
    EXPECT_EQ(first.tuple, (std::vector<ValueIndex>{0, 0, 0}));
    EXPECT_EQ(first.stats, (std::vector<StatId>{0, 2, 4, 6, 8}));
}

TEST(Expanded, SingleAttribute) {
    Schema s({AttributeMeta::categorical("A", {"x", "y"})});
    StatisticSet st(s);
    st.add_one_d(0, 0, 1);
    st.add_one_d(0, 1, 1);
    auto e = build_expanded(st);
    const double a[] = {0.25, 4.0};
    EXPECT_EQ(e.evaluate(a), 4.25);
    EXPECT_THROW(build_expanded(st, 1), ConfigError);
}

TEST(NoConflict, LargeExampleInnerGroups) {
    auto ex = large_example();
    auto by = stats_by_group(ex.stats);
    ASSERT_EQ(by.size(), 3u);
    auto all = find_no_conflict_groups(ex.stats, by, false);
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all.at(Key{0, 1, 2}), (Groups{{ex.j1, ex.j2, ex.j4}}));

    StatsByGroup ab_bc = by;
    ab_bc[2].clear();
    auto two = find_no_conflict_groups(ex.stats, ab_bc, false);
    EXPECT_EQ(two.at(Key{0, 1}), (Groups{{ex.j1, ex.j2}}));

    StatsByGroup bc_only(3);
    bc_only[1] = by[1];
    auto one = find_no_conflict_groups(ex.stats, bc_only, false);
    EXPECT_EQ(one.at(Key{1}), (Groups{{ex.j2}, {ex.j3}}));
}

TEST(NoConflict, OuterKeepsPartialGroups) {
    auto ex = large_example(true);
    auto outer = find_no_conflict_groups(ex.stats, stats_by_group(ex.stats), true);
    ASSERT_EQ(outer.size(), 2u);
    EXPECT_EQ(outer.at(Key{0, 1, 2}), (Groups{{ex.j1, ex.j2, ex.j4}}));
    EXPECT_EQ(outer.at(Key{0, 1}), (Groups{{ex.j1, ex.j5}}));
}

TEST(NoConflict, DisjointAttributePairsCrossProduct) {
    auto schema = numbered_schema(4, 6);
    StatisticSet s(schema);
    for (AttrId a = 0; a < 4; ++a)
        for (ValueIndex v = 0; v < 6; ++v) s.add_one_d(a, v, 1);
    for (ValueIndex v = 0; v < 2; ++v) s.add_multi(pred2(4, 0, v, 1, v), 1);
    for (ValueIndex v = 0; v < 3; ++v) s.add_multi(pred2(4, 2, v, 3, v), 1);
    auto g = find_no_conflict_groups(s, stats_by_group(s), false);
    EXPECT_EQ(g.at(Key{0, 1}).size(), 6u);
}

TEST(ConflictReduce, LargeExample) {
    auto ex = large_example();
    auto red = conflict_reduce(ex.stats, stats_by_group(ex.stats));
    EXPECT_EQ(red[0], (std::vector<StatId>{ex.j1}));
    EXPECT_EQ(red[1], (std::vector<StatId>{ex.j2}));
    EXPECT_EQ(red[2], (std::vector<StatId>{ex.j4}));
}

TEST(ConflictReduce, AllConflictingAndSinglePair) {
    auto schema = numbered_schema(3, 6);
    StatisticSet s(schema);
    for (AttrId a = 0; a < 3; ++a)
        for (ValueIndex v = 0; v < 6; ++v) s.add_one_d(a, v, 1);
    s.add_multi(pred2(3, 0, 0, 1, 0), 1);
    s.add_multi(pred2(3, 1, 3, 2, 0), 1);
    for (const auto& g : conflict_reduce(s, stats_by_group(s))) EXPECT_TRUE(g.empty());

    StatisticSet one(schema);
    for (AttrId a = 0; a < 3; ++a)
        for (ValueIndex v = 0; v < 6; ++v) one.add_one_d(a, v, 1);
    one.add_multi(pred2(3, 0, 0, 1, 0), 1);
    one.add_multi(pred2(3, 0, 1, 1, 1), 1);
    for (const auto& g : conflict_reduce(one, stats_by_group(one))) EXPECT_TRUE(g.empty());
}

TEST(BuildTerm, LargeExampleTerms) {
    auto ex = large_example();
    const auto k = ex.stats.size();
    auto check = [&](const std::vector<StatId>& group, double expected, std::uint64_t refs) {
        auto t = share(build_term(ex.stats, group));
        std::vector<double> a(k, 1.0);
        for (auto j : group) a[j] = 2.0;
        EXPECT_DOUBLE_EQ(eval(t, a), expected);
        EXPECT_EQ(t->size_report().one_d_refs, refs);
        EXPECT_EQ(t->size_report().correction_terms, group.size());
    };
    check({ex.j1}, 100.0 * 100.0, 200);
    check({ex.j1, ex.j2}, 100.0 * 50.0 * 100.0, 250);
    check({ex.j4}, 50.0 * 50.0 * 50.0, 150);
}

TEST(Compressed, NaiveMatchesHandFactorization) {
    auto schema = abc_binary_schema();
    auto stats = example_multi(schema);
    auto naive = share(build_compressed_naive(stats));
    EXPECT_EQ(naive->size_report().top_level_terms, 4u);
    EXPECT_EQ(naive->term_keys().size(), naive->terms().size());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        auto a = uniform_alpha(rng, stats.size());
        EXPECT_NEAR(eval(naive, a), factored_example(a), 1e-12 * std::abs(factored_example(a)) + 1e-15);
    }
}

TEST(Compressed, OneDOnlyIsPureProduct) {
    auto schema = numbered_schema(3, 5);
    StatisticSet s(schema);
    for (AttrId a = 0; a < 3; ++a)
        for (ValueIndex v = 0; v < 5; ++v) s.add_one_d(a, v, 1);
    auto p = share(build_compressed_optimized(s));
    EXPECT_EQ(p->size_report().one_d_refs, 15u);
    EXPECT_EQ(p->size_report().top_level_terms, 1u);
    std::mt19937_64 rng(2);
    auto a = uniform_alpha(rng, s.size());
    double prod = 1;
    for (AttrId at = 0; at < 3; ++at) {
        double sum = 0;
        for (ValueIndex v = 0; v < 5; ++v) sum += a[s.one_d_stat(at, v)];
        prod *= sum;
    }
    EXPECT_NEAR(eval(p, a), prod, 1e-12 * prod);
}

TEST(Compressed, LargeExampleSize) {
    auto ex = large_example();
    for (auto* build : {&build_compressed_naive, &build_compressed_optimized}) {
        auto rep = build(ex.stats).size_report();
        EXPECT_EQ(rep.one_d_refs, 6400u);
        EXPECT_EQ(rep.top_level_terms, 8u);
    }
}

TEST(Compressed, LargeExampleNaiveEqualsOptimized) {
    for (bool fifth : {false, true}) {
        auto ex = large_example(fifth);
        auto naive = share(build_compressed_naive(ex.stats));
        auto opt = share(build_compressed_optimized(ex.stats));
        EXPECT_EQ(naive->size_report().one_d_refs, opt->size_report().one_d_refs);
        EXPECT_EQ(naive->term_keys(), opt->term_keys());
        std::mt19937_64 rng(3);
        for (int i = 0; i < 100; ++i) {
            auto a = uniform_alpha(rng, ex.stats.size(), 0.0, 0.01);
            const double x = eval(naive, a), y = eval(opt, a);
            EXPECT_LE(rel_diff(x, y), 1e-12);
        }
    }
}

TEST(Compressed, OptimizedMatchesExpandedOnBinaryCorrections) {
    auto schema = abc_binary_schema();
    auto stats = example_multi(schema);
    auto opt = share(build_compressed_optimized(stats));
    auto expanded = build_expanded(stats);
    std::mt19937_64 rng(4);
    for (int mask = 0; mask < 16; ++mask) {
        auto a = uniform_alpha(rng, stats.size(), 0.1, 2.0);
        for (int b = 0; b < 4; ++b) a[6 + b] = (mask >> b) & 1;
        EXPECT_LE(rel_diff(eval(opt, a), expanded.evaluate(a)), 1e-12);
    }
}

TEST(Compressed, SinglePairSameAsNaive) {
    auto schema = numbered_schema(3, 4);
    StatisticSet s(schema);
    for (AttrId a = 0; a < 3; ++a)
        for (ValueIndex v = 0; v < 4; ++v) s.add_one_d(a, v, 1);
    s.add_multi(pred2(3, 0, 0, 2, 1), 1);
    s.add_multi(pred2(3, 0, 1, 2, 1), 1);
    auto n = build_compressed_naive(s);
    auto o = build_compressed_optimized(s);
    EXPECT_EQ(n.term_keys(), o.term_keys());
    EXPECT_EQ(n.nodes().size(), o.nodes().size());
    EXPECT_EQ(n.size_report().one_d_refs, o.size_report().one_d_refs);
}

TEST(Compressed, RandomConfigsMatchExpanded) {
    std::mt19937_64 rng(20240);
    for (int c = 0; c < 50; ++c) {
        auto rc = random_config(rng, true);
        auto naive = share(build_compressed_naive(rc.stats));
        auto opt = share(build_compressed_optimized(rc.stats));
        auto expanded = build_expanded(rc.stats);
        Evaluator en(naive, std::vector<double>(rc.stats.size(), 1.0));
        Evaluator eo(opt, std::vector<double>(rc.stats.size(), 1.0));
        for (int i = 0; i < 100; ++i) {
            auto a = uniform_alpha(rng, rc.stats.size());
            const double truth = expanded.evaluate(a);
            ASSERT_LE(std::abs(en.evaluate_with(a) - truth), 1e-9 * std::abs(truth)) << "config " << c;
            ASSERT_LE(std::abs(eo.evaluate_with(a) - truth), 1e-9 * std::abs(truth)) << "config " << c;
        }
    }
}

TEST(Compressed, SizeWithinBound) {
    std::mt19937_64 rng(31);
    for (int c = 0; c < 50; ++c) {
        auto rc = random_config(rng);
        auto rep = build_compressed_optimized(rc.stats).size_report();
        const double ba = static_cast<double>(rc.stats.pair_count());
        const double bs = std::max<double>(2.0, static_cast<double>(rc.stats.max_group_size()));
        double sum_n = 0;
        for (auto n : rc.stats.domain_sizes()) sum_n += n;
        const double bound = 4.0 * std::pow(2.0, ba) * std::pow(bs, ba) * sum_n;
        EXPECT_LE(static_cast<double>(rep.one_d_refs), bound);
    }
}

TEST(Compressed, RejectsIncompleteOneD) {
    auto schema = abc_binary_schema();
    StatisticSet s(schema);
    s.add_one_d(0, 0, 1);
    EXPECT_THROW(build_compressed_optimized(s), ConfigError);
}

TEST(Compressed, FromNodesRoundTrip) {
    auto ex = large_example(true);
    auto p = build_compressed_optimized(ex.stats);
    auto q = share(CompressedPolynomial::from_nodes(p.nodes(), ex.stats.size()));
    auto ps = share(std::move(p));
    std::mt19937_64 rng(6);
    auto a = uniform_alpha(rng, ex.stats.size(), 0.0, 0.01);
    EXPECT_EQ(eval(ps, a), eval(q, a));
    EXPECT_EQ(ps->term_keys(), q->term_keys());
    auto bad = ps->nodes();
    bad.back().children.push_back(static_cast<NodeId>(bad.size() + 3));
    EXPECT_THROW(CompressedPolynomial::from_nodes(bad, ex.stats.size()), std::exception);
}

TEST(Evaluate, ExampleAllOnesAndZeroSet) {
    auto schema = abc_binary_schema();
    auto stats = example_multi(schema);
    Evaluator ev(share(build_compressed_optimized(stats)), std::vector<double>(stats.size(), 1.0));
    EXPECT_EQ(ev.value(), 8.0);
    Predicate only_a1(3);
    only_a1.set(0, Clause::point(0));
    auto zs = ZeroSet::from_predicate(only_a1, stats.domain_sizes());
    EXPECT_EQ(ev.evaluate(zs), 4.0);
    EXPECT_EQ(ev.evaluate(ZeroSet(stats.domain_sizes())), 8.0);
}

TEST(Evaluate, CachedUncachedParallelAgree) {
    std::mt19937_64 rng(8);
    auto ex = large_example(true);
    Evaluator ev(share(build_compressed_optimized(ex.stats)), uniform_alpha(rng, ex.stats.size(), 0.0, 0.01));
    for (int i = 0; i < 30; ++i) {
        auto q = random_predicate(rng, ex.schema);
        auto zs = ZeroSet::from_predicate(q, ex.stats.domain_sizes());
        const double a = ev.evaluate(zs);
        EXPECT_EQ(a, ev.evaluate(zs));
        EXPECT_EQ(a, ev.evaluate_uncached(zs));
        EXPECT_EQ(a, ev.evaluate_parallel(zs, 4));
        EXPECT_LE(rel_diff(a, ev.evaluate_with(ev.alpha(), &zs)), 1e-12);
    }
}

TEST(Evaluate, ZeroSetEqualsExplicitZeros) {
    std::mt19937_64 rng(10);
    for (int c = 0; c < 20; ++c) {
        auto rc = random_config(rng);
        auto alpha = uniform_alpha(rng, rc.stats.size(), 0.1, 2.0);
        Evaluator ev(share(build_compressed_optimized(rc.stats)), alpha);
        for (int i = 0; i < 10; ++i) {
            auto q = random_predicate(rng, rc.schema);
            auto zeroed = alpha;
            for (const auto& st : rc.stats.all())
                if (st.is_one_d() && !q.clause(st.attributes[0]).accepts(st.predicate.clause(st.attributes[0]).lo()))
                    zeroed[st.id] = 0.0;
            const double z = ev.evaluate(ZeroSet::from_predicate(q, rc.stats.domain_sizes()));
            EXPECT_LE(std::abs(z - ev.evaluate_with(zeroed)), 1e-12 * std::max(1.0, std::abs(z)));
        }
    }
}

TEST(Partial, TwoVariable) {
    Schema s({AttributeMeta::categorical("A", {"x", "y"})});
    StatisticSet st(s);
    st.add_one_d(0, 0, 1);
    st.add_one_d(0, 1, 1);
    Evaluator ev(share(build_compressed_optimized(st)), {0.7, 5.0});
    auto [b, a] = partial_value(ev, 0);
    EXPECT_EQ(b, 5.0);
    EXPECT_EQ(a, 1.0);
}

TEST(Partial, ReconstructsAndIsAffine) {
    std::mt19937_64 rng(12);
    for (int c = 0; c < 10; ++c) {
        auto rc = random_config(rng);
        Evaluator ev(share(build_compressed_optimized(rc.stats)), uniform_alpha(rng, rc.stats.size()));
        for (StatId j = 0; j < rc.stats.size(); ++j) {
            auto [b, a] = ev.partial(j);
            EXPECT_NEAR(ev.alpha(j) * a + b, ev.value(), 1e-12 * std::max(1.0, ev.value()));
            const double f0 = ev.value_with(j, 0.3), f1 = ev.value_with(j, 1.1), f2 = ev.value_with(j, 1.9);
            EXPECT_NEAR((f1 - f0) / 0.8, (f2 - f1) / 0.8, 1e-9 * std::max(1.0, std::abs(f1)));
        }
    }
}

TEST(Partial, ZeroVariableGivesB) {
    auto schema = abc_binary_schema();
    auto stats = example_multi(schema);
    std::vector<double> a(stats.size(), 1.3);
    a[7] = 0.0;
    Evaluator ev(share(build_compressed_optimized(stats)), a);
    EXPECT_EQ(ev.value(), ev.partial(7).first);
}

TEST(Evaluate, SetAlphaUpdatesCache) {
    std::mt19937_64 rng(14);
    auto rc = random_config(rng);
    auto p = share(build_compressed_optimized(rc.stats));
    Evaluator ev(p, uniform_alpha(rng, rc.stats.size()));
    for (int i = 0; i < 50; ++i) {
        const StatId j = static_cast<StatId>(rng() % rc.stats.size());
        const double v = std::uniform_real_distribution<double>(0, 2)(rng);
        const double predicted = ev.value_with(j, v);
        ev.set_alpha(j, v);
        EXPECT_EQ(ev.value(), predicted);
        EXPECT_EQ(ev.value(), Evaluator(p, ev.alpha()).value());
    }
}

TEST(PairwiseSum, FixedAssociation) {
    const double v[] = {1e16, 1.0, -1e16, 1.0};
    EXPECT_EQ(pairwise_sum(v), (1e16 + 1.0) + (-1e16 + 1.0));
    EXPECT_EQ(pairwise_sum(std::span<const double>{}), 0.0);
}
