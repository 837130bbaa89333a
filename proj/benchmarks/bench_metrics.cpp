#include <benchmark/benchmark.h>

#include "graphcal/metrics.hpp"
#include "graphcal/random.hpp"

namespace {

using namespace graphcal;

std::vector<ScoredLabel> pairs(std::size_t n) {
  Rng rng(9);
  std::vector<ScoredLabel> out(n);
  for (auto& p : out) {
    p.confidence = rng.uniform();
    p.label = rng.bernoulli(p.confidence) ? 1 : 0;
  }
  return out;
}

void BM_Auroc(benchmark::State& state) {
  const auto p = pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(auroc(p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

void BM_Ece(benchmark::State& state) {
  const auto p = pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ece(p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ece)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
