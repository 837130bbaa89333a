#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "graphcal/errors.hpp"
#include "graphcal/graph.hpp"
#include "graphcal/kmeans.hpp"
#include "graphcal/random.hpp"
#include "graphcal/synthetic.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace graphcal {
namespace {

Eigen::MatrixXd blobs(const std::vector<std::vector<double>>& centers, const std::vector<std::size_t>& sizes,
                      double noise, Rng& rng) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  const auto d = static_cast<Eigen::Index>(centers[0].size());
  Eigen::MatrixXd points(static_cast<Eigen::Index>(total), d);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < sizes[c]; ++i, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) points(row, j) = centers[c][static_cast<std::size_t>(j)] + noise * rng.normal();
    }
  }
  return points;
}

// Minimum within-cluster sum of squares over every assignment into exactly k
// non-empty groups.
double brute_force_inertia(const Eigen::MatrixXd& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<int> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
    if (i == n) {
      if (static_cast<std::size_t>(used) != k) return;
      double total = 0;
      for (int c = 0; c < used; ++c) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
        int count = 0;
        for (std::size_t p = 0; p < n; ++p)
          if (label[p] == c) mean += points.row(static_cast<Eigen::Index>(p)), ++count;
        mean /= count;
        for (std::size_t p = 0; p < n; ++p)
          if (label[p] == c) total += (points.row(static_cast<Eigen::Index>(p)) - mean).squaredNorm();
      }
      best = std::min(best, total);
      return;
    }
    for (int c = 0; c <= used && c < static_cast<int>(k); ++c) {
      label[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

double inertia_of(const Eigen::MatrixXd& points, const ClusterAssignment& a) {
  double total = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - a.centroids.row(a.labels[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

// True when the two labelings induce the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

TEST(Cosine, Examples) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{2, 0}, d{-1, 0};
  EXPECT_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_EQ(cosine_similarity(a, c), 1.0);
  EXPECT_EQ(cosine_similarity(a, d), -1.0);
  EXPECT_THROW(cosine_similarity(a, std::vector<double>{0, 0}), DomainError);
  EXPECT_THROW(cosine_similarity(a, std::vector<double>{1, 0, 0}), DomainError);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> u(7), v(7);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    EXPECT_NEAR(cosine_similarity(u, v), oracle::dot_cosine(u, v), 1e-12);
  }
}

TEST(KMeans, DuplicatePairsGiveTwoClusters) {
  Eigen::MatrixXd p(4, 2);
  p << 1, 0, 1, 0, 0, 1, 0, 1;
  const auto a = kmeans(p, 3, 0);
  EXPECT_EQ(a.k(), 2u);
  EXPECT_EQ(a.sizes, (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(a.inertia, 0.0);
  EXPECT_EQ(a.labels[0], a.labels[1]);
  EXPECT_NE(a.labels[0], a.labels[2]);
}

TEST(KMeans, SinglePointAndIdenticalPoints) {
  Eigen::MatrixXd one(1, 3);
  one << 1, 2, 3;
  EXPECT_EQ(kmeans(one, 3, 0).k(), 1u);
  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 3);
  const auto a = kmeans(same, 3, 0);
  EXPECT_EQ(a.sizes, std::vector<std::size_t>{5});
  EXPECT_EQ(count_distinct_rows(same), 1u);
}

TEST(KMeans, TwoSeparatedBlobs) {
  Rng rng(4);
  std::vector<double> c1(16, 0.0), c2(16, 0.0);
  c1[0] = 5;
  c2[1] = 5;
  const auto p = blobs({c1, c2}, {7, 4}, 0.05, rng);
  const auto a = kmeans(p, 3, 9);
  ASSERT_EQ(a.k(), 2u);
  EXPECT_EQ(a.sizes, (std::vector<std::size_t>{7, 4}));
  for (int i = 0; i < 7; ++i) EXPECT_EQ(a.labels[static_cast<std::size_t>(i)], 0);
  for (int i = 7; i < 11; ++i) EXPECT_EQ(a.labels[static_cast<std::size_t>(i)], 1);
}

TEST(KMeans, InvariantsOnRandomInputs) {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(12));
    Eigen::MatrixXd p(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) p(i, j) = static_cast<double>(rng.below(3));
    const auto a = kmeans(p, 3, static_cast<std::uint64_t>(t));
    ASSERT_GE(a.k(), 1u);
    ASSERT_LE(a.k(), std::min<std::size_t>(3, count_distinct_rows(p)));
    ASSERT_TRUE(std::is_sorted(a.sizes.rbegin(), a.sizes.rend()));
    std::vector<std::size_t> counted(a.k(), 0);
    for (int l : a.labels) ++counted[static_cast<std::size_t>(l)];
    ASSERT_EQ(counted, a.sizes);
    ASSERT_NEAR(a.inertia, inertia_of(p, a), 1e-9);
    ASSERT_EQ(a.labels, kmeans(p, 3, static_cast<std::uint64_t>(t)).labels);
  }
}

TEST(KMeans, NeverBeatsExhaustiveOptimum) {
  Rng rng(21);
  int optimal = 0;
  for (int t = 0; t < 60; ++t) {
    Eigen::MatrixXd p(7, 2);
    for (Eigen::Index i = 0; i < 7; ++i) p(i, 0) = rng.normal(), p(i, 1) = rng.normal();
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto a = kmeans_fixed_k(p, k, KMeansOptions{3, static_cast<std::uint64_t>(t)});
      const double best = brute_force_inertia(p, k);
      ASSERT_GE(a.inertia, best - 1e-9);
      if (a.inertia <= best + 1e-9) ++optimal;
    }
  }
  // Five restarts on seven points usually find the optimum.
  EXPECT_GE(optimal, 160);
}

TEST(KMeans, FixedKRejectsTooManyClusters) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(3, 2);
  EXPECT_THROW(kmeans_fixed_k(p, 2, KMeansOptions{}), DomainError);
  EXPECT_THROW(kmeans_fixed_k(p, 0, KMeansOptions{}), DomainError);
}

TEST(BuildGraph, WeightsAndFeatures) {
  const auto q = fixture::record_with_embeddings("q", {{1, 0}, {1, 0}, {1, 1}, {-1, 0}});
  const auto g = build_graph(q);
  ASSERT_EQ(g.n, 4u);
  EXPECT_TRUE(g.weights.isApprox(g.weights.transpose(), 0));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(g.weights(i, i), 1.0);
  EXPECT_NEAR(g.weights(0, 2), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(g.weights(0, 3), 0.0);  // negative cosine clamps to zero
  EXPECT_EQ(g.node_features.cols(), 3);
  EXPECT_TRUE((g.node_features.rowwise().sum().array() == 1.0).all());
  EXPECT_EQ(g.weights.minCoeff(), 0.0);
  EXPECT_LE(g.weights.maxCoeff(), 1.0);
}

TEST(BuildGraph, RougeEdges) {
  auto q = fixture::record_with_embeddings("q", {{1, 0}, {0, 1}, {1, 1}});
  q.responses[0].text = "the cat";
  q.responses[1].text = "the cat sat";
  q.responses[2].text = "!!";
  GraphOptions options;
  options.edge_weights = EdgeWeightMode::rouge;
  const auto g = build_graph(q, options);
  EXPECT_DOUBLE_EQ(g.weights(0, 1), 0.8);
  EXPECT_EQ(g.weights(0, 2), 0.0);
}

TEST(BuildGraph, ExplicitPrimaryWins) {
  auto q = fixture::record_with_embeddings("q", {{1, 0}, {1, 0.01}, {0, 1}});
  q.responses[2].is_primary = true;
  EXPECT_EQ(build_graph(q).primary_index, 2u);
  q.responses[2].is_primary.reset();
  EXPECT_EQ(build_graph(q).cluster_of[build_graph(q).primary_index], 0);
}

TEST(BuildGraph, SingleResponseAndErrors) {
  const auto g = build_graph(fixture::record_with_embeddings("q", {{0.3, 0.4}}));
  EXPECT_EQ(g.n, 1u);
  EXPECT_EQ(g.cluster_sizes, std::vector<std::size_t>{1});
  EXPECT_THROW(build_graph(fixture::record_with_embeddings("z", {{0, 0}, {1, 0}})), DomainError);
  auto missing = fixture::record_with_embeddings("m", {{1, 0}, {0, 1}});
  missing.responses[1].embedding.reset();
  EXPECT_THROW(build_graph(missing), DataError);
  GraphOptions bad;
  bad.k_max = 0;
  EXPECT_THROW(build_graph(fixture::record_with_embeddings("k", {{1, 0}}), bad), ConfigError);
}

TEST(BuildGraph, PermutationEquivariant) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto points = blobs({{3, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 3, 0}}, {6, 3, 2}, 0.1, rng);
    std::vector<std::vector<double>> emb;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(points.cols()));
      for (Eigen::Index j = 0; j < points.cols(); ++j) row[static_cast<std::size_t>(j)] = points(i, j);
      emb.push_back(row);
    }
    const auto perm = fixture::random_permutation(emb.size(), rng);
    std::vector<std::vector<double>> shuffled;
    for (auto p : perm) shuffled.push_back(emb[p]);
    const auto g = build_graph(fixture::record_with_embeddings("a", emb));
    const auto h = build_graph(fixture::record_with_embeddings("b", shuffled));
    ASSERT_EQ(g.cluster_sizes, h.cluster_sizes);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      for (std::size_t j = 0; j < perm.size(); ++j) {
        // Blocked matrix products may round differently after reordering.
        ASSERT_NEAR(h.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                    g.weights(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])), 1e-15);
      }
      // Sizes are distinct, so cluster ids are canonical.
      ASSERT_EQ(h.cluster_of[i], g.cluster_of[perm[i]]);
    }
  }
}

TEST(PoolMultiPrompt, GroupsByPromptStably) {
  auto q = fixture::record_with_embeddings("q", {{1, 0}, {2, 0}, {3, 0}, {4, 0}});
  q.rephrasings = {"r1", "r2"};
  q.responses[0].prompt_index = 2;
  q.responses[1].prompt_index = 0;
  q.responses[2].prompt_index = 2;
  q.responses[3].prompt_index = 1;
  const auto pooled = pool_multi_prompt(q);
  std::vector<std::string> texts;
  for (const auto& r : pooled.responses) texts.push_back(r.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"response 1", "response 3", "response 0", "response 2"}));
  const auto single = fixture::record_with_embeddings("s", {{1, 0}, {0, 1}});
  EXPECT_EQ(pool_multi_prompt(single), single);
}

TEST(BuildGraph, RecoversPlantedClusters) {
  SyntheticOptions opt;
  opt.num_questions = 300;
  opt.n_per_question = 30;
  opt.seed = 77;
  const auto data = generate(opt);
  std::size_t recovered = 0;
  for (std::size_t q = 0; q < data.records.size(); ++q) {
    const auto g = build_graph(data.records[q], GraphOptions{EdgeWeightMode::cosine, 3, 5});
    if (same_partition(g.cluster_of, data.truths[q].planted_cluster)) ++recovered;
  }
  EXPECT_GE(static_cast<double>(recovered) / static_cast<double>(data.records.size()), 0.99);
}

}  // namespace
}  // namespace graphcal
