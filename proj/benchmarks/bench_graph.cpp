#include <benchmark/benchmark.h>

#include "graphcal/graph.hpp"
#include "graphcal/synthetic.hpp"

namespace {

using namespace graphcal;

void BM_BuildGraph(benchmark::State& state) {
  SyntheticOptions o;
  o.num_questions = 1;
  o.n_per_question = static_cast<std::size_t>(state.range(0));
  const auto record = generate(o).records[0];
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(record));
}
BENCHMARK(BM_BuildGraph)->Arg(10)->Arg(30)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
