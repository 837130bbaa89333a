#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace graphcal {

/// One sampled answer to a question.
struct ResponseRecord {
  std::string text;
  int prompt_index = 0;  // 0 = original question, i = rephrasing i
  std::optional<std::vector<double>> embedding;
  std::optional<double> token_logprob_sum;  // natural log
  std::optional<int> token_count;
  std::optional<int> label;  // 0 / 1
  // Absent means "let graph construction pick"; see build_graph.
  std::optional<bool> is_primary;

  bool operator==(const ResponseRecord&) const = default;
};

struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> rephrasings;
  std::optional<std::string> reference_answer;
  std::vector<ResponseRecord> responses;

  bool operator==(const QuestionRecord&) const = default;
};

/// Fully connected similarity graph over one question's responses.
struct ConsistencyGraph {
  std::size_t n = 0;
  Eigen::MatrixXd weights;        // n x n, symmetric, unit diagonal, in [0, 1]
  Eigen::MatrixXd node_features;  // n x k_max one-hot cluster membership
  std::vector<std::size_t> cluster_sizes;  // non-increasing, one per cluster
  std::vector<int> cluster_of;             // cluster id per node
  std::size_t primary_index = 0;
};

/// Per-question calibrated probabilities.
struct QuestionScores {
  std::string id;
  std::vector<double> probabilities;
  std::size_t primary_index = 0;

  double primary_probability() const { return probabilities.at(primary_index); }
};

using CalibrationScores = std::vector<QuestionScores>;

}  // namespace graphcal
