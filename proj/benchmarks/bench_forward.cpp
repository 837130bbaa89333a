#include <benchmark/benchmark.h>

#include "graphcal/gcn.hpp"
#include "graphcal/graph.hpp"
#include "graphcal/synthetic.hpp"

namespace {

using namespace graphcal;

std::vector<ConsistencyGraph> graphs(std::size_t questions, std::size_t n) {
  SyntheticOptions o;
  o.num_questions = questions;
  o.n_per_question = n;
  const auto data = generate(o);
  std::vector<ConsistencyGraph> out;
  for (const auto& r : data.records) out.push_back(build_graph(r));
  return out;
}

void BM_ForwardSingleGraph(benchmark::State& state) {
  const auto g = graphs(1, static_cast<std::size_t>(state.range(0)));
  const auto model = GcnModel::initialize(GcnDims{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, g[0]));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardSingleGraph)->Arg(10)->Arg(30)->Arg(60);

void BM_ForwardBatch(benchmark::State& state) {
  const auto g = graphs(static_cast<std::size_t>(state.range(0)), 30);
  std::vector<const ConsistencyGraph*> ptrs;
  for (const auto& x : g) ptrs.push_back(&x);
  const auto batch = GraphBatch::from_graphs(ptrs);
  const auto model = GcnModel::initialize(GcnDims{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(16)->Arg(64);

void BM_Backward(benchmark::State& state) {
  const auto g = graphs(1, 30);
  const auto model = GcnModel::initialize(GcnDims{}, 1);
  const Eigen::VectorXd labels = Eigen::VectorXd::Ones(30);
  for (auto _ : state) benchmark::DoNotOptimize(backward(model, g[0], labels));
}
BENCHMARK(BM_Backward);

}  // namespace

BENCHMARK_MAIN();
