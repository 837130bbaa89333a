#include <benchmark/benchmark.h>

#include "graphcal/kmeans.hpp"
#include "graphcal/random.hpp"

namespace {

using namespace graphcal;

// Three noisy blobs in the given dimension.
Eigen::MatrixXd blobs(Eigen::Index n, Eigen::Index dim) {
  Rng rng(5);
  Eigen::MatrixXd p(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < dim; ++c) p(i, c) = 0.05 * rng.normal();
    p(i, i % 3) += 1.0;
  }
  return p;
}

void BM_KMeansSelectK(benchmark::State& state) {
  const auto p = blobs(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(p, 3, 0));
}
BENCHMARK(BM_KMeansSelectK)->Args({30, 64})->Args({30, 384})->Args({100, 384});

void BM_KMeansFixedK(benchmark::State& state) {
  const auto p = blobs(30, 384);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_fixed_k(p, 3, KMeansOptions{}));
}
BENCHMARK(BM_KMeansFixedK);

}  // namespace

BENCHMARK_MAIN();
