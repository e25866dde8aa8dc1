#include <benchmark/benchmark.h>

#include "common.hpp"
#include "drfr/retrieval.hpp"
#include "drfr/trainer.hpp"

namespace {

void BM_Retrieve(benchmark::State& state) {
    const auto gallery = bench::synthetic(static_cast<std::uint32_t>(state.range(0)), 32, 1);
    const auto model = drfr::initial_model(gallery, drfr::Hyperparams{}, drfr::feature_scale(gallery));
    const drfr::Query q{gallery[0], gallery[gallery.size() - 1]};
    for (auto _ : state) {
        auto list = drfr::retrieve(gallery, q, model, 1.0, 10);
        benchmark::DoNotOptimize(list.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gallery.size()));
}
BENCHMARK(BM_Retrieve)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_HierarchicalRetrieve(benchmark::State& state) {
    const auto gallery = bench::synthetic(100, 32, 1);
    const auto model = drfr::initial_model(gallery, drfr::Hyperparams{}, drfr::feature_scale(gallery));
    const drfr::Query q{gallery[0], gallery[gallery.size() - 1]};
    for (auto _ : state) {
        auto list = drfr::hierarchical_retrieve(gallery, q, model, 100, 10);
        benchmark::DoNotOptimize(list.data());
    }
}
BENCHMARK(BM_HierarchicalRetrieve)->Unit(benchmark::kMicrosecond);

}  // namespace
