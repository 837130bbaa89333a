#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphcal/types.hpp"

namespace graphcal::pipeline {

/// Question ids of a three-way split, each list in dataset order.
struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  bool operator==(const DatasetSplit&) const = default;
};

/// Seeded partition: round(test_fraction n) test questions, round(val_fraction n)
/// validation questions, the rest train. Every part keeps at least one question.
DatasetSplit make_split(const std::vector<std::string>& ids, double val_fraction, double test_fraction,
                        std::uint64_t seed);

void write_split(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit read_split(const std::filesystem::path& path);

/// Scores file: one JSON object per question
/// {"id", "method", "primary_index", "probabilities", ["uncertainty"]}.
struct ScoredQuestion {
  QuestionScores scores;
  std::optional<double> uncertainty;  // graph-spectral diagnostics
};

struct ScoresFile {
  std::string method;
  std::vector<ScoredQuestion> questions;
};

void write_scores(const ScoresFile& scores, const std::filesystem::path& path);
ScoresFile read_scores(const std::filesystem::path& path);

enum class ArtifactStatus { complete, partial };

struct ArtifactEntry {
  std::string path;  // relative to the manifest's directory when possible
  std::string stage;
  ArtifactStatus status = ArtifactStatus::complete;
  std::string sha256;
};

/// Provenance record written next to a run's outputs.
class Manifest {
 public:
  Manifest(std::filesystem::path directory, std::string command);

  void set_config(std::string canonical_ini, std::string hash);
  void set_seed(const std::string& name, std::uint64_t value);
  void add_input(const std::filesystem::path& path);
  void begin_stage(const std::string& stage);
  /// Declares a file the current stage is about to write. end_stage hashes
  /// it; fail marks it partial if it exists and drops it otherwise.
  void declare(const std::filesystem::path& path);
  void end_stage();
  void fail(const std::string& message);
  const std::optional<std::string>& current_stage() const { return current_stage_; }

  std::string to_json() const;
  void write(const std::filesystem::path& path) const;

  const std::vector<ArtifactEntry>& artifacts() const { return artifacts_; }

 private:
  std::string relative(const std::filesystem::path& path) const;

  std::filesystem::path directory_;
  std::string command_;
  std::string config_ini_;
  std::string config_hash_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> stages_;
  std::optional<std::string> current_stage_;
  std::vector<ArtifactEntry> artifacts_;
  std::vector<std::filesystem::path> pending_;
  std::optional<std::string> failed_stage_;
  std::optional<std::string> error_;
};

/// Version tag of each stage's output format/semantics.
const std::map<std::string, int>& stage_versions();

}  // namespace graphcal::pipeline
