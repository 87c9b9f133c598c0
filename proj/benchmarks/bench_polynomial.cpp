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
#include <maxent/polynomial.hpp>
#include <maxent/synthetic.hpp>

#include <benchmark/benchmark.h>

#include <memory>

using namespace maxent;

namespace {

StatisticSet synthetic_stats(std::size_t budget) {
    static const auto ds = make_synthetic({});
    SelectionConfig cfg;
    cfg.stat_budget = budget;
    return select_statistics(ds, cfg).statistics;
}

void BM_BuildOptimized(benchmark::State& state) {
    const auto stats = synthetic_stats(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_compressed_optimized(stats));
    state.counters["statistics"] = static_cast<double>(stats.size());
}
BENCHMARK(BM_BuildOptimized)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildNaive(benchmark::State& state) {
    const auto stats = synthetic_stats(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_compressed_naive(stats));
}
BENCHMARK(BM_BuildNaive)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EvaluateRoot(benchmark::State& state) {
    const auto stats = synthetic_stats(static_cast<std::size_t>(state.range(0)));
    auto poly = std::make_shared<const CompressedPolynomial>(build_compressed_optimized(stats));
    Evaluator ev(poly, std::vector<double>(stats.size(), 1.0));
    for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate_uncached(ZeroSet(stats.domain_sizes())));
    state.counters["nodes"] = static_cast<double>(poly->size_report().nodes);
}
BENCHMARK(BM_EvaluateRoot)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
