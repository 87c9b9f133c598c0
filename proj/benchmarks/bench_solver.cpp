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
#include <maxent/solver.hpp>
#include <maxent/synthetic.hpp>

#include <benchmark/benchmark.h>

using namespace maxent;

namespace {

void BM_SolverSweep(benchmark::State& state) {
    static const auto ds = make_synthetic({});
    SelectionConfig sel;
    sel.stat_budget = static_cast<std::size_t>(state.range(0));
    auto stats = select_statistics(ds, sel).statistics;
    Summary s(ds.schema(), stats, static_cast<double>(ds.size()));
    const SolverConfig one{.threshold = 1e-300, .max_sweeps = 1};
    for (auto _ : state) benchmark::DoNotOptimize(solve(s, one));
    state.counters["statistics"] = static_cast<double>(stats.size());
}
BENCHMARK(BM_SolverSweep)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
