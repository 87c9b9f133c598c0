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

#pragma once

#include <maxent/model.hpp>
#include <maxent/polynomial.hpp>
#include <maxent/solver.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace maxent::testing {

// Three binary attributes, n = 10, 1D counts a:(3,7) b:(8,2) c:(6,4).
inline Schema abc_binary_schema() {
    return Schema({AttributeMeta::categorical("A", {"a1", "a2"}), AttributeMeta::categorical("B", {"b1", "b2"}),
                   AttributeMeta::categorical("C", {"c1", "c2"})});
}

inline StatisticSet example_one_d(const Schema& schema) {
    StatisticSet s(schema);
    s.add_one_d(0, 0, 3);
    s.add_one_d(0, 1, 7);
    s.add_one_d(1, 0, 8);
    s.add_one_d(1, 1, 2);
    s.add_one_d(2, 0, 6);
    s.add_one_d(2, 1, 4);
    return s;
}

inline Predicate pred2(std::size_t arity, AttrId a, ValueIndex va, AttrId b, ValueIndex vb) {
    Predicate p(arity);
    p.set(a, Clause::point(va)).set(b, Clause::point(vb));
    return p;
}

// Adds the four two-attribute statistics: ab(1,1)=2, ab(2,2)=1, bc(1,1)=5, bc(2,1)=1.
inline StatisticSet example_multi(const Schema& schema) {
    StatisticSet s = example_one_d(schema);
    s.add_multi(pred2(3, 0, 0, 1, 0), 2);
    s.add_multi(pred2(3, 0, 1, 1, 1), 1);
    s.add_multi(pred2(3, 1, 0, 2, 0), 5);
    s.add_multi(pred2(3, 1, 1, 2, 0), 1);
    return s;
}

// Ten tuples consistent with every statistic above.
inline Dataset example_dataset() {
    Dataset ds(abc_binary_schema());
    const std::vector<std::vector<ValueIndex>> rows = {
        {0, 1, 1}, {0, 0, 1}, {0, 0, 1}, {1, 1, 0}, {1, 0, 0},
        {1, 0, 0}, {1, 0, 0}, {1, 0, 0}, {1, 0, 0}, {1, 0, 1},
    };
    for (const auto& r : rows) ds.append(r);
    return ds;
}

inline Schema numbered_schema(std::size_t attrs, std::uint32_t n) {
    std::vector<std::string> labels;
    for (std::uint32_t v = 1; v <= n; ++v) labels.push_back(std::to_string(v));
    std::vector<AttributeMeta> metas;
    const char* names[] = {"A", "B", "C", "D", "E", "F"};
    for (std::size_t i = 0; i < attrs; ++i) metas.push_back(AttributeMeta::categorical(names[i], labels));
    return Schema(std::move(metas));
}

// Range over 1-based labels [lo, hi].
inline Clause labels(ValueIndex lo, ValueIndex hi) { return Clause::range(lo - 1, hi - 1); }

struct LargeExample {
    Schema schema;
    StatisticSet stats;
    StatId j1 = 0, j2 = 0, j3 = 0, j4 = 0, j5 = kNoStat;
};

// Three attributes of 1000 values with statistics on AB, BC (two) and ABC.
// with_fifth adds a BC rectangle that meets j1 on B but misses j4.
inline LargeExample large_example(bool with_fifth = false) {
    LargeExample ex{numbered_schema(3, 1000), {}, 0, 0, 0, 0, kNoStat};
    ex.stats = StatisticSet(ex.schema);
    for (AttrId a = 0; a < 3; ++a)
        for (ValueIndex v = 0; v < 1000; ++v) ex.stats.add_one_d(a, v, 1.0);
    Predicate p1(3), p2(3), p3(3), p4(3);
    p1.set(0, labels(101, 200)).set(1, labels(501, 600));
    p2.set(1, labels(551, 650)).set(2, labels(801, 900));
    p3.set(1, labels(651, 700)).set(2, labels(701, 800));
    p4.set(0, labels(101, 150)).set(1, labels(551, 600)).set(2, labels(801, 850));
    ex.j1 = ex.stats.add_multi(p1, 1.0);
    ex.j2 = ex.stats.add_multi(p2, 1.0);
    ex.j3 = ex.stats.add_multi(p3, 1.0);
    ex.j4 = ex.stats.add_multi(p4, 1.0);
    if (with_fifth) {
        Predicate p5(3);
        p5.set(1, labels(401, 550)).set(2, labels(751, 850));
        ex.j5 = ex.stats.add_multi(p5, 1.0);
    }
    return ex;
}

struct RandomConfig {
    Schema schema;
    StatisticSet stats;
};

// Random disjoint rectangles over a pair of domains.
inline std::vector<std::pair<Clause, Clause>> random_rects(std::mt19937_64& rng, std::uint32_t n1, std::uint32_t n2,
                                                           std::size_t count) {
    std::vector<std::pair<Clause, Clause>> out;
    std::vector<std::vector<char>> used(n1, std::vector<char>(n2, 0));
    for (int attempt = 0; attempt < 200 && out.size() < count; ++attempt) {
        auto pick = [&](std::uint32_t n) {
            std::uint32_t a = std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
            std::uint32_t b = std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
            return std::pair{std::min(a, b), std::max(a, b)};
        };
        auto [x0, x1] = pick(n1);
        auto [y0, y1] = pick(n2);
        bool clash = false;
        for (auto x = x0; x <= x1 && !clash; ++x)
            for (auto y = y0; y <= y1; ++y)
                if (used[x][y]) {
                    clash = true;
                    break;
                }
        if (clash) continue;
        for (auto x = x0; x <= x1; ++x)
            for (auto y = y0; y <= y1; ++y) used[x][y] = 1;
        out.push_back({x0 == x1 ? Clause::point(x0) : Clause::range(x0, x1),
                       y0 == y1 ? Clause::point(y0) : Clause::range(y0, y1)});
    }
    return out;
}

// m <= 3 attributes, N_i <= 6, up to 3 pairs with up to 4 disjoint rectangles each.
// Optionally one three-attribute group as well.
inline RandomConfig random_config(std::mt19937_64& rng, bool allow_triple = false) {
    std::uniform_int_distribution<std::uint32_t> dom(2, 6);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
    std::vector<AttributeMeta> metas;
    std::vector<std::uint32_t> sizes;
    for (std::size_t i = 0; i < m; ++i) {
        sizes.push_back(dom(rng));
        std::vector<std::string> l;
        for (std::uint32_t v = 0; v < sizes.back(); ++v) l.push_back("v" + std::to_string(v));
        metas.push_back(AttributeMeta::categorical(std::string(1, static_cast<char>('A' + i)), l));
    }
    RandomConfig rc{Schema(std::move(metas)), {}};
    rc.stats = StatisticSet(rc.schema);
    std::uniform_real_distribution<double> target(0.0, 20.0);
    for (AttrId a = 0; a < m; ++a)
        for (ValueIndex v = 0; v < sizes[a]; ++v) rc.stats.add_one_d(a, v, target(rng));
    std::vector<std::pair<AttrId, AttrId>> pairs;
    for (AttrId a = 0; a < m; ++a)
        for (AttrId b = a + 1; b < m; ++b) pairs.push_back({a, b});
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const std::size_t npairs = std::uniform_int_distribution<std::size_t>(0, std::min<std::size_t>(3, pairs.size()))(rng);
    for (std::size_t k = 0; k < npairs; ++k) {
        auto [a, b] = pairs[k];
        const std::size_t count = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        for (auto& [ca, cb] : random_rects(rng, sizes[a], sizes[b], count)) {
            Predicate p(m);
            p.set(a, ca).set(b, cb);
            rc.stats.add_multi(p, target(rng));
        }
    }
    if (allow_triple && m == 3 && std::bernoulli_distribution(0.5)(rng)) {
        Predicate p(m);
        for (AttrId a = 0; a < 3; ++a) {
            auto v = std::uniform_int_distribution<std::uint32_t>(0, sizes[a] - 1)(rng);
            p.set(a, Clause::range(v, std::min(v + 1, sizes[a] - 1)));
        }
        rc.stats.add_multi(p, target(rng));
    }
    return rc;
}

// Positive values with a sprinkling of exact zeros on multi-dimensional statistics.
inline std::vector<double> random_alpha(std::mt19937_64& rng, const StatisticSet& stats) {
    std::uniform_real_distribution<double> u(0.05, 3.0);
    std::bernoulli_distribution zero(0.1);
    std::vector<double> a(stats.size());
    for (StatId j = 0; j < stats.size(); ++j) a[j] = (!stats[j].is_one_d() && zero(rng)) ? 0.0 : u(rng);
    return a;
}

// Random rows over the config's domains, with statistics recomputed from them.
inline Dataset random_dataset(std::mt19937_64& rng, const Schema& schema, std::size_t rows) {
    Dataset ds(schema);
    std::vector<ValueIndex> t(schema.size());
    // skewed so that some cells stay empty
    for (std::size_t r = 0; r < rows; ++r) {
        for (AttrId a = 0; a < schema.size(); ++a) {
            const auto n = schema[a].size();
            std::geometric_distribution<std::uint32_t> g(0.35);
            t[a] = std::min(g(rng), n - 1);
            if (a > 0 && std::bernoulli_distribution(0.5)(rng)) t[a] = std::min(t[a - 1], n - 1);
        }
        ds.append(t);
    }
    return ds;
}

// Same predicates as shape, targets taken from the rows.
inline StatisticSet restate(const StatisticSet& shape, const Schema& schema, const Dataset& ds) {
    StatisticSet out(schema);
    std::vector<double> counts(shape.size(), 0.0);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        auto row = ds.row(r);
        for (auto j : shape.matching(row)) counts[j] += 1.0;
    }
    for (const auto& st : shape.all()) {
        if (st.is_one_d())
            out.add_one_d(st.attributes[0], st.predicate.clause(st.attributes[0]).lo(), counts[st.id]);
        else
            out.add_multi(st.predicate, counts[st.id]);
    }
    return out;
}

inline Predicate random_predicate(std::mt19937_64& rng, const Schema& schema) {
    Predicate p(schema.size());
    for (AttrId a = 0; a < schema.size(); ++a) {
        const auto n = schema[a].size();
        switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
            case 0: break;
            case 1: p.set(a, Clause::point(std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng))); break;
            case 2: {
                auto x = std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
                auto y = std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
                p.set(a, Clause::range(std::min(x, y), std::max(x, y)));
                break;
            }
            default: {
                std::vector<ValueIndex> vals;
                for (ValueIndex v = 0; v < n; ++v)
                    if (std::bernoulli_distribution(0.5)(rng)) vals.push_back(v);
                if (vals.empty()) vals.push_back(0);
                p.set(a, Clause::set(vals));
            }
        }
    }
    return p;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace maxent::testing
