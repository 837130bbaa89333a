#include "graphcal/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "graphcal/errors.hpp"
#include "graphcal/random.hpp"

namespace graphcal {

std::size_t count_distinct_rows(const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto row_less = [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) < points(b, c)) return true;
      if (points(b, c) < points(a, c)) return false;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  std::size_t distinct = n > 0 ? 1 : 0;
  for (std::size_t i = 1; i < n; ++i)
    if (row_less(order[i - 1], order[i])) ++distinct;
  return distinct;
}

namespace {

struct RunResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                        Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));

  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centroids, static_cast<Eigen::Index>(c - 1)));
      total += d;
    }
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[static_cast<std::size_t>(i)];
        if (target < 0.0 && nearest[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      // Guard against rounding leaving us on an already-chosen point.
      while (nearest[static_cast<std::size_t>(pick)] == 0.0 && pick > 0) --pick;
    }
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(pick);
  }
  return centroids;
}

RunResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids, std::size_t max_iterations) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centroids.rows();
  RunResult run;
  run.labels.assign(static_cast<std::size_t>(n), -1);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centroids, 0);
      for (Eigen::Index c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (run.labels[static_cast<std::size_t>(i)] != best) {
        run.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    run.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = run.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = squared_distance(points, i, centroids, run.labels[static_cast<std::size_t>(i)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids.row(c) = points.row(far);
      run.labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
    }
  }

  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    run.inertia += squared_distance(points, i, centroids, run.labels[static_cast<std::size_t>(i)]);
  run.centroids = std::move(centroids);
  return run;
}

}  // namespace

ClusterAssignment kmeans_fixed_k(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options) {
  if (points.rows() < 1) throw DomainError("kmeans: need at least one point");
  if (k < 1 || k > count_distinct_rows(points)) throw DomainError("kmeans: k must lie in 1..distinct points");
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);

  RunResult best;
  bool have_best = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(derive_seed(options.seed, k), r));
    RunResult run = lloyd(points, seed_plus_plus(points, k, rng), options.max_iterations);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }

  std::vector<std::size_t> sizes(k, 0);
  for (int label : best.labels) ++sizes[static_cast<std::size_t>(label)];
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
  std::vector<int> rank(k);
  for (std::size_t i = 0; i < k; ++i) rank[order[i]] = static_cast<int>(i);

  ClusterAssignment out;
  out.labels.reserve(best.labels.size());
  for (int label : best.labels) out.labels.push_back(rank[static_cast<std::size_t>(label)]);
  out.centroids.resize(static_cast<Eigen::Index>(k), points.cols());
  out.sizes.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.centroids.row(static_cast<Eigen::Index>(i)) = best.centroids.row(static_cast<Eigen::Index>(order[i]));
    out.sizes[i] = sizes[order[i]];
  }
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  return out;
}

ClusterAssignment kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options) {
  if (points.rows() < 1) throw DomainError("kmeans: need at least one point");
  if (options.k_max < 1) throw DomainError("kmeans: k_max must be >= 1");

  const std::size_t k_limit = std::min(options.k_max, count_distinct_rows(points));
  std::vector<ClusterAssignment> runs;
  runs.push_back(kmeans_fixed_k(points, 1, options));
  std::size_t chosen = 0;
  for (std::size_t k = 2; k <= k_limit; ++k) {
    runs.push_back(kmeans_fixed_k(points, k, options));
    const double previous = runs[k - 2].inertia;
    if (previous > 0.0 && runs[k - 1].inertia < options.split_ratio * previous) chosen = k - 1;
  }
  return std::move(runs[chosen]);
}

}  // namespace graphcal
