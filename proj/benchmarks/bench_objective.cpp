#include <benchmark/benchmark.h>

#include "common.hpp"
#include "drfr/loss.hpp"
#include "drfr/trainer.hpp"

namespace {

void BM_ObjectiveWithGradients(benchmark::State& state) {
    const auto ds = bench::synthetic(static_cast<std::uint32_t>(state.range(0)), 32);
    const auto quartets = drfr::enumerate_quartets(ds);
    drfr::Hyperparams hyper;
    const auto edges = drfr::build_graphs(ds, hyper).all_edges();
    const auto model = drfr::initial_model(ds, hyper, drfr::feature_scale(ds));
    for (auto _ : state) {
        auto eval = drfr::evaluate_objective(ds, quartets, edges, model.embedding, model.metric, hyper, true);
        benchmark::DoNotOptimize(eval.total);
    }
    state.counters["quartets"] = static_cast<double>(quartets.size());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(quartets.size()));
}
BENCHMARK(BM_ObjectiveWithGradients)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MineBatch(benchmark::State& state) {
    const auto ds = bench::synthetic(10, 32);
    const auto model = drfr::initial_model(ds, drfr::Hyperparams{}, drfr::feature_scale(ds));
    std::vector<std::size_t> batch(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = (i * 7) % ds.size();
    for (auto _ : state) {
        auto mined = drfr::mine_quartets(batch, ds, model.embedding, model.metric);
        benchmark::DoNotOptimize(mined.data());
    }
}
BENCHMARK(BM_MineBatch)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_FitBenchmark(benchmark::State& state) {
    const auto ds = bench::synthetic(10, 32);
    drfr::TrainConfig config;
    config.hyper.epochs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto report = drfr::fit(ds, config);
        benchmark::DoNotOptimize(report.objective.back());
    }
}
BENCHMARK(BM_FitBenchmark)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
