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

#include <maxent/pipeline.hpp>
#include <maxent/query.hpp>
#include <maxent/synthetic.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace maxent;

namespace {

const Summary& reference_summary() {
    static const Summary s = [] {
        auto ds = make_synthetic({});
        BuildConfig cfg;
        cfg.selection.stat_budget = 32;
        cfg.selection.sort = SortKind::twod;
        return build_summary(ds, cfg);
    }();
    return s;
}

void BM_PointQuery(benchmark::State& state) {
    const auto& s = reference_summary();
    std::mt19937_64 rng(1);
    std::vector<Predicate> qs;
    for (int i = 0; i < 256; ++i) {
        Predicate p(s.schema().size());
        for (AttrId a = 0; a < s.schema().size(); ++a) p.set(a, Clause::point(static_cast<ValueIndex>(rng() % s.schema()[a].size())));
        qs.push_back(p);
    }
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(answer_count(s, qs[i++ % qs.size()]));
}
BENCHMARK(BM_PointQuery)->Unit(benchmark::kMicrosecond);

void BM_RangeQuery(benchmark::State& state) {
    const auto& s = reference_summary();
    Predicate p(s.schema().size());
    p.set(0, Clause::range(4, 20)).set(2, Clause::range(0, 11));
    for (auto _ : state) benchmark::DoNotOptimize(answer_count(s, p));
}
BENCHMARK(BM_RangeQuery)->Unit(benchmark::kMicrosecond);

void BM_GroupByPair(benchmark::State& state) {
    const auto& s = reference_summary();
    GroupByQuery g;
    g.attributes = {0, 1};
    for (auto _ : state) benchmark::DoNotOptimize(answer_groupby(s, g));
}
BENCHMARK(BM_GroupByPair)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
