#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "graphcal/types.hpp"

namespace graphcal {

enum class EdgeWeightMode { cosine, rouge };

EdgeWeightMode parse_edge_weight_mode(std::string_view name);
const char* to_string(EdgeWeightMode mode) noexcept;

struct GraphOptions {
  EdgeWeightMode edge_weights = EdgeWeightMode::cosine;
  std::size_t k_max = 3;
  std::uint64_t seed = 0;
  double split_ratio = 0.75;  // see KMeansOptions
};

/// dot(u, v) / (|u| |v|). Zero vectors and dimension mismatch are domain errors.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Responses of every rephrasing form one response set, grouped by
/// prompt_index (stable within a group). A single-prompt record is unchanged.
QuestionRecord pool_multi_prompt(QuestionRecord record);

/// Edge weights (clamped cosine or ROUGE-L), size-ordered K-means cluster
/// one-hot features of width k_max, and the primary response index: the
/// explicit is_primary response if any, otherwise the member of the largest
/// cluster nearest (max cosine) to its centroid.
ConsistencyGraph build_graph(const QuestionRecord& record, const GraphOptions& options = {});

/// Embeddings as an n x d matrix. Throws DataError if any is missing.
Eigen::MatrixXd embedding_matrix(const QuestionRecord& record);

}  // namespace graphcal
