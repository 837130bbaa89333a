#include "graphcal/graph.hpp"

#include <algorithm>
#include <cmath>

#include "graphcal/errors.hpp"
#include "graphcal/kmeans.hpp"
#include "graphcal/rouge.hpp"
#include "graphcal/text.hpp"

namespace graphcal {

EdgeWeightMode parse_edge_weight_mode(std::string_view name) {
  if (name == "cosine") return EdgeWeightMode::cosine;
  if (name == "rouge") return EdgeWeightMode::rouge;
  throw ConfigError("unknown edge weight mode '" + std::string(name) + "'");
}

const char* to_string(EdgeWeightMode mode) noexcept {
  return mode == EdgeWeightMode::cosine ? "cosine" : "rouge";
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("cosine_similarity: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw DomainError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

QuestionRecord pool_multi_prompt(QuestionRecord record) {
  std::stable_sort(record.responses.begin(), record.responses.end(),
                   [](const ResponseRecord& a, const ResponseRecord& b) {
                     return a.prompt_index < b.prompt_index;
                   });
  return record;
}

Eigen::MatrixXd embedding_matrix(const QuestionRecord& record) {
  const auto n = static_cast<Eigen::Index>(record.responses.size());
  if (n == 0) throw DataError("question '" + record.id + "' has no responses");
  Eigen::MatrixXd points;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& emb = record.responses[static_cast<std::size_t>(i)].embedding;
    if (!emb) {
      throw DataError("question '" + record.id + "' responses[" + std::to_string(i) +
                      "] has no embedding");
    }
    if (i == 0) points.resize(n, static_cast<Eigen::Index>(emb->size()));
    if (static_cast<Eigen::Index>(emb->size()) != points.cols()) {
      throw DataError("question '" + record.id + "' mixes embedding dimensions");
    }
    points.row(i) = Eigen::Map<const Eigen::RowVectorXd>(emb->data(), points.cols());
  }
  return points;
}

ConsistencyGraph build_graph(const QuestionRecord& record, const GraphOptions& options) {
  if (options.k_max < 1) throw ConfigError("k_max must be >= 1");
  const Eigen::MatrixXd points = embedding_matrix(record);
  const auto n = static_cast<std::size_t>(points.rows());
  const auto dn = static_cast<Eigen::Index>(n);

  ConsistencyGraph g;
  g.n = n;
  g.weights.resize(dn, dn);

  if (options.edge_weights == EdgeWeightMode::cosine) {
    Eigen::VectorXd norms = points.rowwise().norm();
    for (std::size_t i = 0; i < n; ++i) {
      if (norms(static_cast<Eigen::Index>(i)) == 0.0) {
        throw DomainError("question '" + record.id + "' responses[" + std::to_string(i) +
                          "] has a zero embedding");
      }
    }
    const Eigen::MatrixXd unit = points.array().colwise() / norms.array();
    const Eigen::MatrixXd gram = unit * unit.transpose();
    for (Eigen::Index i = 0; i < dn; ++i) {
      g.weights(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < dn; ++j) {
        const double w = std::clamp(gram(i, j), 0.0, 1.0);
        g.weights(i, j) = w;
        g.weights(j, i) = w;
      }
    }
  } else {
    std::vector<std::vector<std::string>> tokens;
    tokens.reserve(n);
    for (const auto& r : record.responses) tokens.push_back(tokenize(r.text));
    for (Eigen::Index i = 0; i < dn; ++i) {
      g.weights(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < dn; ++j) {
        const auto& a = tokens[static_cast<std::size_t>(i)];
        const auto& b = tokens[static_cast<std::size_t>(j)];
        const double w = (a.empty() || b.empty()) ? 0.0 : rouge_l_f1(a, b);
        g.weights(i, j) = w;
        g.weights(j, i) = w;
      }
    }
  }

  KMeansOptions km;
  km.k_max = options.k_max;
  km.seed = options.seed;
  km.split_ratio = options.split_ratio;
  const ClusterAssignment clusters = kmeans(points, km);
  g.cluster_sizes = clusters.sizes;
  g.cluster_of = clusters.labels;
  g.node_features = Eigen::MatrixXd::Zero(dn, static_cast<Eigen::Index>(options.k_max));
  for (Eigen::Index i = 0; i < dn; ++i) g.node_features(i, clusters.labels[static_cast<std::size_t>(i)]) = 1.0;

  const auto explicit_primary =
      std::find_if(record.responses.begin(), record.responses.end(),
                   [](const ResponseRecord& r) { return r.is_primary.value_or(false); });
  if (explicit_primary != record.responses.end()) {
    g.primary_index = static_cast<std::size_t>(explicit_primary - record.responses.begin());
  } else {
    const Eigen::RowVectorXd centroid = clusters.centroids.row(0);
    const double centroid_norm = centroid.norm();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (clusters.labels[i] != 0) continue;
      const double sim = centroid_norm == 0.0
                             ? 0.0
                             : points.row(static_cast<Eigen::Index>(i)).dot(centroid) /
                                   (points.row(static_cast<Eigen::Index>(i)).norm() * centroid_norm);
      if (sim > best) {
        best = sim;
        g.primary_index = i;
      }
    }
  }
  return g;
}

}  // namespace graphcal
