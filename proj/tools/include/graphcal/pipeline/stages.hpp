#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphcal/gcn.hpp"
#include "graphcal/labeling.hpp"
#include "graphcal/metrics.hpp"
#include "graphcal/pipeline/artifacts.hpp"
#include "graphcal/pipeline/config.hpp"
#include "graphcal/synthetic.hpp"
#include "graphcal/train.hpp"

namespace graphcal::pipeline {

SyntheticDataset run_synth(const PipelineConfig& config);

/// Pools multi-prompt responses, fills missing embeddings, validates.
std::vector<QuestionRecord> run_ingest(std::vector<QuestionRecord> records, const PipelineConfig& config);

struct LabelOutcome {
  std::vector<QuestionRecord> records;
  std::vector<JudgeWarning> unlabeled;
};

/// Questions whose responses are all labeled are left alone unless
/// label.overwrite is set. `judge` overrides the HTTP judge (tests).
LabelOutcome run_label(std::vector<QuestionRecord> records, const PipelineConfig& config,
                       Judge* judge = nullptr);

std::vector<ConsistencyGraph> run_graphs(std::span<const QuestionRecord> records, const PipelineConfig& config);

/// One JSON object per question: id, n, cluster_sizes, cluster_of,
/// primary_index, weights (row-major).
void write_graphs(std::span<const QuestionRecord> records, std::span<const ConsistencyGraph> graphs,
                  const std::filesystem::path& path);

/// Pairs graphs with labels; every response must be labeled.
std::vector<LabeledGraph> attach_labels(std::span<const QuestionRecord> records,
                                        std::span<const ConsistencyGraph> graphs);

std::vector<std::string> question_ids(std::span<const QuestionRecord> records);

DatasetSplit run_split(std::span<const QuestionRecord> records, const PipelineConfig& config);

/// Trains on the split's train questions, early-stopping on its val questions.
TrainResult run_train(std::span<const LabeledGraph> graphs, const DatasetSplit& split,
                      const PipelineConfig& config);

/// Scores every question. `model` is required for the gnn method.
ScoresFile run_score(ScoreMethod method, std::span<const QuestionRecord> records,
                     std::span<const ConsistencyGraph> graphs, const GcnModel* model,
                     const PipelineConfig& config);

struct Evaluation {
  std::string method;
  PosthocMethod posthoc = PosthocMethod::none;
  bool per_response = false;
  std::string subset;        // "test" with a split, "all" without
  std::size_t questions = 0;
  EvalReport report;
};

/// Evaluates on the split's test questions (all questions without a split).
/// A post-hoc map is fitted on the train questions and applied to the test
/// questions; it needs a split.
Evaluation run_evaluate(std::span<const QuestionRecord> records, const ScoresFile& scores,
                        const std::optional<DatasetSplit>& split, const EvaluateConfig& config);

std::string evaluation_to_json(const Evaluation& evaluation);
void write_evaluation(const Evaluation& evaluation, const std::filesystem::path& report_json,
                      const std::filesystem::path& reliability_csv);

}  // namespace graphcal::pipeline
