#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphcal/random.hpp"
#include "graphcal/types.hpp"

namespace fixture {

// Random valid consistency graph: symmetric weights in [0, 1], unit
// diagonal, and a one-hot feature per node over `k` columns.
inline graphcal::ConsistencyGraph random_graph(std::size_t n, std::size_t k, std::uint64_t seed) {
  graphcal::Rng rng(seed);
  graphcal::ConsistencyGraph g;
  g.n = n;
  const auto dn = static_cast<Eigen::Index>(n);
  g.weights = Eigen::MatrixXd::Identity(dn, dn);
  for (Eigen::Index i = 0; i < dn; ++i) {
    for (Eigen::Index j = i + 1; j < dn; ++j) g.weights(i, j) = g.weights(j, i) = rng.uniform();
  }
  g.node_features = Eigen::MatrixXd::Zero(dn, static_cast<Eigen::Index>(k));
  g.cluster_of.resize(n);
  g.cluster_sizes.assign(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.below(k));
    g.cluster_of[i] = c;
    g.node_features(static_cast<Eigen::Index>(i), c) = 1.0;
    ++g.cluster_sizes[static_cast<std::size_t>(c)];
  }
  return g;
}

// Node i of the result is node perm[i] of `g`.
inline graphcal::ConsistencyGraph permute(const graphcal::ConsistencyGraph& g, const std::vector<std::size_t>& perm) {
  graphcal::ConsistencyGraph out = g;
  const auto dn = static_cast<Eigen::Index>(g.n);
  for (Eigen::Index i = 0; i < dn; ++i) {
    for (Eigen::Index j = 0; j < dn; ++j) {
      out.weights(i, j) = g.weights(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]),
                                    static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
    }
    out.node_features.row(i) = g.node_features.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
    out.cluster_of[static_cast<std::size_t>(i)] = g.cluster_of[perm[static_cast<std::size_t>(i)]];
  }
  return out;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, graphcal::Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  rng.shuffle(p);
  return p;
}

inline std::vector<std::string> random_tokens(graphcal::Rng& rng, std::size_t max_len, std::size_t alphabet) {
  const std::size_t len = 1 + rng.below(max_len);
  std::vector<std::string> out(len);
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + rng.below(alphabet)));
  return out;
}

// A small record with `n` embedded responses, none labeled.
inline graphcal::QuestionRecord record_with_embeddings(const std::string& id,
                                                       const std::vector<std::vector<double>>& embeddings) {
  graphcal::QuestionRecord q;
  q.id = id;
  q.question = "question " + id;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    graphcal::ResponseRecord r;
    r.text = "response " + std::to_string(i);
    r.embedding = embeddings[i];
    q.responses.push_back(std::move(r));
  }
  return q;
}

}  // namespace fixture
