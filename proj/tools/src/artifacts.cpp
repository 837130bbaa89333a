#include "graphcal/pipeline/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphcal/errors.hpp"
#include "graphcal/pipeline/config.hpp"
#include "graphcal/random.hpp"

namespace graphcal::pipeline {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump_to(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::vector<std::string> id_list(const nlohmann::json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw DataError("split file '" + path.string() + "': field '" + key + "' missing or not a list");
  }
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

DatasetSplit make_split(const std::vector<std::string>& ids, double val_fraction, double test_fraction,
                        std::uint64_t seed) {
  const std::size_t n = ids.size();
  if (n < 3) throw DataError("a train/val/test split needs at least 3 questions, got " + std::to_string(n));
  const auto count = [n](double f) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(f * static_cast<double>(n))), 1, n);
  };
  std::size_t n_test = count(test_fraction);
  std::size_t n_val = count(val_fraction);
  if (n_test + n_val > n - 1) {
    throw ConfigError("split fractions leave no training questions for " + std::to_string(n) + " questions");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x5350u));
  rng.shuffle(order);

  std::vector<int> part(n, 0);  // 0 train, 1 val, 2 test
  for (std::size_t i = 0; i < n_test; ++i) part[order[i]] = 2;
  for (std::size_t i = n_test; i < n_test + n_val; ++i) part[order[i]] = 1;

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    (part[i] == 0 ? split.train : part[i] == 1 ? split.val : split.test).push_back(ids[i]);
  }
  return split;
}

void write_split(const DatasetSplit& split, const std::filesystem::path& path) {
  ordered_json j;
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  dump_to(path, j.dump(2) + "\n");
}

DatasetSplit read_split(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("split file '" + path.string() + "': " + e.what());
  }
  DatasetSplit split;
  split.seed = j.value("seed", std::uint64_t{0});
  split.train = id_list(j, "train", path);
  split.val = id_list(j, "val", path);
  split.test = id_list(j, "test", path);
  return split;
}

void write_scores(const ScoresFile& scores, const std::filesystem::path& path) {
  std::string text;
  for (const auto& q : scores.questions) {
    ordered_json j;
    j["id"] = q.scores.id;
    j["method"] = scores.method;
    j["primary_index"] = q.scores.primary_index;
    j["probabilities"] = q.scores.probabilities;
    if (q.uncertainty) j["uncertainty"] = *q.uncertainty;
    text += j.dump() + "\n";
  }
  dump_to(path, text);
}

ScoresFile read_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open scores '" + path.string() + "'");
  ScoresFile out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_number, "", e.what());
    }
    const auto field = [&](const char* name) -> const nlohmann::json& {
      if (!j.contains(name)) throw ParseError(line_number, name, "missing required field");
      return j.at(name);
    };
    ScoredQuestion q;
    try {
      q.scores.id = field("id").get<std::string>();
      q.scores.primary_index = field("primary_index").get<std::size_t>();
      q.scores.probabilities = field("probabilities").get<std::vector<double>>();
      if (j.contains("uncertainty")) q.uncertainty = j.at("uncertainty").get<double>();
      const auto method = field("method").get<std::string>();
      if (out.questions.empty()) out.method = method;
      else if (method != out.method) throw ParseError(line_number, "method", "mixes methods in one file");
    } catch (const nlohmann::json::type_error& e) {
      throw ParseError(line_number, "", e.what());
    }
    if (q.scores.primary_index >= q.scores.probabilities.size()) {
      throw ParseError(line_number, "primary_index", "out of range");
    }
    out.questions.push_back(std::move(q));
  }
  return out;
}

const std::map<std::string, int>& stage_versions() {
  static const std::map<std::string, int> versions = {
      {"synth", 1}, {"ingest", 1}, {"label", 1}, {"graph", 1},  {"split", 1},
      {"train", 1}, {"calibrate", 1}, {"baseline", 1}, {"evaluate", 1}, {"report", 1}, {"repeat", 1},
  };
  return versions;
}

Manifest::Manifest(std::filesystem::path directory, std::string command)
    : directory_(std::move(directory)), command_(std::move(command)) {}

void Manifest::set_config(std::string canonical_ini, std::string hash) {
  config_ini_ = std::move(canonical_ini);
  config_hash_ = std::move(hash);
}

void Manifest::set_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void Manifest::add_input(const std::filesystem::path& path) {
  inputs_.emplace_back(path.string(), sha256_file(path));
}

void Manifest::begin_stage(const std::string& stage) {
  if (current_stage_) end_stage();
  current_stage_ = stage;
  stages_.push_back(stage);
}

void Manifest::declare(const std::filesystem::path& path) {
  if (!current_stage_) throw ConfigError("manifest: artifact declared outside a stage");
  pending_.push_back(path);
}

void Manifest::end_stage() {
  if (!current_stage_) return;
  for (const auto& path : pending_) {
    artifacts_.push_back({relative(path), *current_stage_, ArtifactStatus::complete, sha256_file(path)});
  }
  pending_.clear();
  current_stage_.reset();
}

void Manifest::fail(const std::string& message) {
  failed_stage_ = current_stage_.value_or("");
  error_ = message;
  for (const auto& path : pending_) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) continue;
    std::string digest;
    try {
      digest = sha256_file(path);
    } catch (const Error&) {
    }
    artifacts_.push_back({relative(path), current_stage_.value_or(""), ArtifactStatus::partial, digest});
  }
  pending_.clear();
  current_stage_.reset();
}

std::string Manifest::relative(const std::filesystem::path& path) const {
  std::error_code ec;
  auto rel = std::filesystem::relative(path, directory_, ec);
  if (ec || rel.empty() || rel.native().starts_with("..")) return path.generic_string();
  return rel.generic_string();
}

std::string Manifest::to_json() const {
  ordered_json j;
  j["format"] = "graphcal-manifest";
  j["version"] = 1;
  j["command"] = command_;
  j["config_sha256"] = config_hash_;
  j["config"] = config_ini_;
  j["seeds"] = seeds_;
  ordered_json versions = ordered_json::object();
  for (const auto& [stage, v] : stage_versions()) versions[stage] = v;
  j["stage_versions"] = std::move(versions);
  j["stages"] = stages_;
  auto inputs = ordered_json::array();
  for (const auto& [path, digest] : inputs_) inputs.push_back({{"path", path}, {"sha256", digest}});
  j["inputs"] = std::move(inputs);
  auto artifacts = ordered_json::array();
  for (const auto& a : artifacts_) {
    artifacts.push_back({{"path", a.path},
                         {"stage", a.stage},
                         {"status", a.status == ArtifactStatus::complete ? "complete" : "partial"},
                         {"sha256", a.sha256}});
  }
  j["artifacts"] = std::move(artifacts);
  j["status"] = error_ ? "failed" : "complete";
  if (error_) {
    j["failed_stage"] = *failed_stage_;
    j["error"] = *error_;
  }
  return j.dump(2);
}

void Manifest::write(const std::filesystem::path& path) const { dump_to(path, to_json() + "\n"); }

}  // namespace graphcal::pipeline
