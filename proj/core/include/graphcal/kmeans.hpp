#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace graphcal {

struct ClusterAssignment {
  std::vector<int> labels;         // per point, 0 = largest cluster
  std::vector<std::size_t> sizes;  // non-increasing
  Eigen::MatrixXd centroids;       // k x d, rows in relabeled order
  double inertia = 0.0;            // within-cluster sum of squares
  std::size_t iterations = 0;      // Lloyd iterations of the kept restart

  std::size_t k() const { return sizes.size(); }
};

struct KMeansOptions {
  std::size_t k_max = 3;
  std::uint64_t seed = 0;
  std::size_t restarts = 5;
  std::size_t max_iterations = 100;
  // The chosen k is the largest one whose inertia is below split_ratio
  // times the (k-1)-cluster inertia (k = 1 if none qualifies).
  double split_ratio = 0.75;
};

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
/// k ranges over 1..min(k_max, number of distinct rows) and is selected by
/// the split_ratio test. For every k the restart with the
/// lowest inertia wins (earliest on ties). Cluster ids are ordered by size,
/// largest first; equal sizes keep their seeding order.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

/// Fixed-k clustering (no k selection). Requires 1 <= k <= distinct rows.
ClusterAssignment kmeans_fixed_k(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options);

inline ClusterAssignment kmeans(const Eigen::MatrixXd& points, std::size_t k_max,
                                std::uint64_t seed) {
  return kmeans(points, KMeansOptions{k_max, seed});
}

std::size_t count_distinct_rows(const Eigen::MatrixXd& points);

}  // namespace graphcal
