#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "graphcal/embedding.hpp"
#include "graphcal/graph.hpp"
#include "graphcal/labeling.hpp"
#include "graphcal/posthoc.hpp"
#include "graphcal/synthetic.hpp"
#include "graphcal/train.hpp"

namespace graphcal::pipeline {

enum class ScoreMethod { gnn, cluster_freq, seqlik, degree };

ScoreMethod parse_score_method(std::string_view name);
const char* to_string(ScoreMethod method) noexcept;

/// One row of the repeat table: a scorer plus an optional post-hoc map.
struct MethodSpec {
  ScoreMethod method = ScoreMethod::gnn;
  PosthocMethod posthoc = PosthocMethod::none;

  bool operator==(const MethodSpec&) const = default;
};

/// "cluster-freq+isotonic" style names.
MethodSpec parse_method_spec(std::string_view text);
std::string to_string(const MethodSpec& spec);

struct SplitConfig {
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
};

struct EvaluateConfig {
  ScoreMethod method = ScoreMethod::gnn;
  PosthocMethod posthoc = PosthocMethod::none;
  std::size_t bins = 10;
  bool per_response = false;
};

struct RepeatConfig {
  std::size_t runs = 10;
  std::vector<MethodSpec> rows;
};

/// Fully resolved configuration of every stage.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::filesystem::path out_dir = "graphcal-out";
  std::optional<std::filesystem::path> dataset;  // absent: generate synthetic data

  SyntheticOptions synth;
  EmbeddingProviderConfig embedding;
  bool label_enabled = true;
  LabelerConfig labeler;
  std::optional<std::filesystem::path> manual_labels;
  GraphOptions graph;
  SplitConfig split;
  TrainConfig train;
  EvaluateConfig evaluate;
  RepeatConfig repeat;

  void validate() const;
};

using Tree = boost::property_tree::ptree;

Tree read_ini_file(const std::filesystem::path& path);
Tree parse_ini(const std::string& text);

/// Applies "section.key=value"; ConfigError on a malformed assignment.
void apply_assignment(Tree& tree, std::string_view assignment);

/// Builds a config from a tree. Unknown sections or keys are ConfigErrors;
/// seeds not given explicitly fall back to run.seed.
PipelineConfig config_from_tree(const Tree& tree);

/// Every key of the resolved configuration, sections and keys sorted.
std::string canonical_ini(const PipelineConfig& config);

/// Hex SHA-256 of canonical_ini.
std::string config_hash(const PipelineConfig& config);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace graphcal::pipeline
