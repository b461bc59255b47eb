// Serial reference vs OpenMP kernel on a reduced descriptor grid.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "morse/descriptors.hpp"

namespace {

const morse::MorseParams kForced{10.0, 1.0, 8.0, 1.0, 1.0};

morse::GridSpec small_grid(int n) {
    morse::GridSpec g;
    g.nq = static_cast<std::size_t>(n);
    g.np = static_cast<std::size_t>(n);
    g.tau = 10.0;
    return g;
}

void BM_LdSerial(benchmark::State& state) {
    const morse::GridSpec grid = small_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(morse::ld_field_serial(kForced, grid).values.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.nq * grid.np));
}

void BM_LdParallel(benchmark::State& state) {
    const morse::GridSpec grid = small_grid(static_cast<int>(state.range(0)));
    morse::LdConfig cfg;
    cfg.threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(morse::ld_field(kForced, grid, cfg).values.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.nq * grid.np));
}

}  // namespace

BENCHMARK(BM_LdSerial)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LdParallel)
    ->ArgsProduct({{40}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
