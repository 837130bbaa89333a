#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "graphcal/errors.hpp"
#include "graphcal/pipeline/stages.hpp"

namespace graphcal::pipeline {

/// Failure inside run/repeat: keeps the original error kind and names the
/// stage that failed.
class StageError : public Error {
 public:
  StageError(ErrorKind kind, std::string stage, const std::string& what)
      : Error(kind, stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Progress sink; the CLI points it at stderr.
using Logger = std::function<void(std::string_view)>;

struct PreparedData {
  std::vector<QuestionRecord> records;  // ingested and labeled
  std::vector<ConsistencyGraph> graphs;
};

/// synth (when run.dataset is unset) or read, then ingest and label. Writes
/// dataset.jsonl (and truths.jsonl for synthetic data) into out_dir.
PreparedData prepare_data(const PipelineConfig& config, Manifest& manifest, const Logger& log,
                          Judge* judge = nullptr);

struct RunResult {
  DatasetSplit split;
  Evaluation evaluation;
};

/// Full pipeline into config.out_dir: dataset.jsonl, split.json, model.json
/// and train_log.csv (gnn only), scores.jsonl, report.json, reliability.csv,
/// manifest.json. The manifest is written even when a stage fails; the error
/// is rethrown afterwards.
RunResult run_pipeline(const PipelineConfig& config, const std::string& command, const Logger& log = {},
                       Judge* judge = nullptr);

struct RepeatRow {
  MethodSpec spec;
  std::string name;
  bool computed = true;
  std::string reason;  // why the row was not computed
  std::vector<double> brier, auroc, ece;
};

struct RepeatSummary {
  std::size_t runs = 0;
  bool per_response = false;
  std::vector<std::uint64_t> split_seeds;
  std::vector<RepeatRow> rows;
  /// Baselines the toolkit cannot run offline; listed as "not computed".
  std::vector<std::string> excluded;
};

/// R train/evaluate cycles over prepared data; run r uses split seed
/// derive_seed(split.seed, r).
RepeatSummary run_repeat(std::span<const QuestionRecord> records, std::span<const ConsistencyGraph> graphs,
                         const PipelineConfig& config, const Logger& log = {});

/// Prepares data, repeats, writes table.md, summary.json and manifest.json.
RepeatSummary run_repeat_command(const PipelineConfig& config, const std::string& command,
                                 const Logger& log = {});

std::string display_name(const MethodSpec& spec);
/// ".136 ± .002": three decimals, leading zero dropped, sample std.
std::string format_mean_std(std::span<const double> values);
std::string format_table(const RepeatSummary& summary);
std::string summary_to_json(const RepeatSummary& summary);

}  // namespace graphcal::pipeline
