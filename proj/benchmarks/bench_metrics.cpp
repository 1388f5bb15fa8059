#include <benchmark/benchmark.h>

#include "triage/harness.hpp"

namespace {

void BM_PriorShiftGrid(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(triage::curve_tsv(0.7769, 12.0 / 467.0, 0.01, 0.99, 0.01));
}
BENCHMARK(BM_PriorShiftGrid);

void BM_NearestRankQuantile(benchmark::State& state) {
  std::vector<double> costs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < costs.size(); ++i)
    costs[i] = 0.01 * static_cast<double>((i * 2654435761u) % 997);
  for (auto _ : state)
    benchmark::DoNotOptimize(triage::nearest_rank_quantile(costs, 99.0));
}
BENCHMARK(BM_NearestRankQuantile)->Arg(100)->Arg(10000);

}  // namespace
