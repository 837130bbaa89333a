#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace graphcal {

struct ScoredLabel {
  double confidence = 0.0;  // in [0, 1]
  int label = 0;            // 0 / 1
};

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;  // 0 when empty
  double accuracy = 0.0;         // 0 when empty
  double fraction_of_total = 0.0;
};

struct EvalReport {
  double ece = 0.0;
  double brier = 0.0;
  double auroc = 0.0;
  std::size_t count = 0;
  std::vector<ReliabilityBin> bins;
};

/// Equal-width bins over [0, 1]; bin index floor(c * B), c = 1 in the last bin.
std::size_t bin_index(double confidence, std::size_t bins);

/// One row per bin, empty bins included.
std::vector<ReliabilityBin> reliability_diagram(std::span<const ScoredLabel> pairs, std::size_t bins = 10);

/// sum_b (n_b / N) |acc(b) - conf(b)| over an existing bin table.
double ece_from_bins(std::span<const ReliabilityBin> bins);

struct EceResult {
  double value = 0.0;
  std::vector<ReliabilityBin> bins;
};

EceResult ece(std::span<const ScoredLabel> pairs, std::size_t bins = 10);
double brier(std::span<const ScoredLabel> pairs);
/// Mann-Whitney statistic with average ranks for ties.
double auroc(std::span<const ScoredLabel> pairs);

/// All three metrics plus the bin table.
EvalReport evaluate(std::span<const ScoredLabel> pairs, std::size_t bins = 10);

std::string report_to_json(const EvalReport& report);
void write_report_json(const EvalReport& report, const std::filesystem::path& path);
void write_reliability_csv(std::span<const ReliabilityBin> bins, const std::filesystem::path& path);

}  // namespace graphcal
