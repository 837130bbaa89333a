#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphcal/metrics.hpp"
#include "graphcal/types.hpp"

namespace graphcal {

enum class Distortion { identity, square, sqrt };

Distortion parse_distortion(std::string_view name);
const char* to_string(Distortion d) noexcept;
double apply_distortion(Distortion d, double x);

struct SyntheticOptions {
  std::size_t num_questions = 100;
  std::size_t n_per_question = 30;
  Distortion distortion = Distortion::identity;
  std::uint64_t seed = 0;
  std::size_t dimension = 32;
  double noise_sigma = 0.05;
  double min_share = 0.2;
  double max_share = 1.0;
  double wrong_share_scale = 0.15;  // wrong responses use distortion(scale * x)
  double min_center_cosine = 0.1;   // wrong centers vs. correct center
  double max_center_cosine = 0.3;
};

/// Ground truth recorded for one generated question.
struct QuestionTruth {
  std::string id;
  double dominant_share = 0.0;            // x
  std::size_t dominant_size = 0;          // ceil(x n)
  std::vector<double> true_probability;   // per response
  std::vector<int> planted_cluster;       // 0 = correct center, 1..2 = wrong

  bool operator==(const QuestionTruth&) const = default;
};

struct SyntheticDataset {
  std::vector<QuestionRecord> records;
  std::vector<QuestionTruth> truths;
};

/// Planted-cluster dataset with a known correctness process. Question q is
/// generated from its own derived seed, so any prefix of a larger dataset
/// matches a smaller one with the same seed.
SyntheticDataset generate(const SyntheticOptions& options);

void write_truths(std::span<const QuestionTruth> truths, const std::filesystem::path& path);
std::vector<QuestionTruth> read_truths(const std::filesystem::path& path);

struct OracleReport {
  double ece = 0.0;           // against sampled labels
  double expected_gap = 0.0;  // mean |confidence - true probability|
  std::size_t count = 0;
};

/// Scores one confidence per response (`confidences[q][i]`) against the
/// sampled labels and the recorded truths. With primary_only, only each
/// question's is_primary response is used.
OracleReport oracle_ece_of_baseline(std::span<const QuestionRecord> records,
                                    std::span<const QuestionTruth> truths,
                                    std::span<const std::vector<double>> confidences,
                                    bool primary_only = true, std::size_t bins = 10);

}  // namespace graphcal
