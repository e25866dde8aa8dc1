#include <benchmark/benchmark.h>

#include "common.hpp"
#include "drfr/graph.hpp"

namespace {

void BM_BuildGraphs(benchmark::State& state) {
    const auto ds = bench::synthetic(static_cast<std::uint32_t>(state.range(0)), 32);
    const drfr::Hyperparams hyper;
    for (auto _ : state) {
        auto graphs = drfr::build_graphs(ds, hyper);
        benchmark::DoNotOptimize(graphs.per_age.data());
    }
    state.counters["samples"] = static_cast<double>(ds.size());
}
BENCHMARK(BM_BuildGraphs)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
