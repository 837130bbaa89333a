#include <benchmark/benchmark.h>

#include "graphcal/random.hpp"
#include "graphcal/rouge.hpp"
#include "graphcal/text.hpp"

namespace {

using namespace graphcal;

std::vector<std::string> words(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.below(50)));
  return out;
}

void BM_RougeL(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = words(n, 1), b = words(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rouge_l_f1(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RougeL)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_Tokenize(benchmark::State& state) {
  std::string text;
  for (const auto& w : words(200, 3)) text += w + ", ";
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize);

}  // namespace

BENCHMARK_MAIN();
