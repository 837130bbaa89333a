#include "graphcal/pipeline/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "graphcal/checkpoint.hpp"
#include "graphcal/dataset.hpp"
#include "graphcal/errors.hpp"
#include "graphcal/random.hpp"

namespace graphcal::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void say(const Logger& log, const std::string& message) {
  if (log) log(message);
}

void record_seeds(Manifest& manifest, const PipelineConfig& c) {
  manifest.set_config(canonical_ini(c), config_hash(c));
  manifest.set_seed("run", c.seed);
  if (!c.dataset) manifest.set_seed("synth", c.synth.seed);
  manifest.set_seed("ingest", c.embedding.seed);
  manifest.set_seed("graph", c.graph.seed);
  manifest.set_seed("split", c.split.seed);
  manifest.set_seed("model", c.train.model_seed);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

// Runs body(); on failure flags the current stage in the manifest, writes
// it, and rethrows with the stage name attached.
template <class Body>
auto guarded(Manifest& manifest, const fs::path& manifest_path, Body&& body) {
  const auto record_failure = [&](const std::string& message) {
    manifest.fail(message);
    try {
      manifest.write(manifest_path);
    } catch (const std::exception&) {
    }
  };
  try {
    return body();
  } catch (const Error& e) {
    const std::string stage = manifest.current_stage().value_or("run");
    record_failure(e.what());
    throw StageError(e.kind(), stage, e.what());
  } catch (const std::exception& e) {
    record_failure(e.what());
    throw;
  }
}

}  // namespace

PreparedData prepare_data(const PipelineConfig& config, Manifest& manifest, const Logger& log, Judge* judge) {
  const fs::path dir = config.out_dir;
  std::vector<QuestionRecord> records;
  if (config.dataset) {
    manifest.begin_stage("ingest");
    manifest.add_input(*config.dataset);
    say(log, "reading " + config.dataset->string());
    records = read_dataset(*config.dataset);
  } else {
    manifest.begin_stage("synth");
    say(log, "generating " + std::to_string(config.synth.num_questions) + " synthetic questions");
    auto synthetic = run_synth(config);
    manifest.declare(dir / "truths.jsonl");
    write_truths(synthetic.truths, dir / "truths.jsonl");
    records = std::move(synthetic.records);
    manifest.begin_stage("ingest");
  }
  records = run_ingest(std::move(records), config);

  manifest.begin_stage("label");
  if (config.label_enabled) {
    auto labeled = run_label(std::move(records), config, judge);
    for (const auto& w : labeled.unlabeled) {
      say(log, "warning: question '" + w.question_id + "' response " + std::to_string(w.response_index) +
                   " left unlabeled (judge reply had no score)");
    }
    records = std::move(labeled.records);
  }
  manifest.declare(dir / "dataset.jsonl");
  write_dataset(records, dir / "dataset.jsonl");

  manifest.begin_stage("graph");
  say(log, "building " + std::to_string(records.size()) + " consistency graphs");
  auto graphs = run_graphs(records, config);
  manifest.end_stage();
  return {std::move(records), std::move(graphs)};
}

RunResult run_pipeline(const PipelineConfig& config, const std::string& command, const Logger& log,
                       Judge* judge) {
  config.validate();
  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  const fs::path manifest_path = dir / "manifest.json";
  Manifest manifest(dir, command);
  record_seeds(manifest, config);

  RunResult result = guarded(manifest, manifest_path, [&] {
    auto data = prepare_data(config, manifest, log, judge);

    manifest.begin_stage("split");
    RunResult r;
    r.split = run_split(data.records, config);
    manifest.declare(dir / "split.json");
    write_split(r.split, dir / "split.json");

    std::optional<GcnModel> model;
    if (config.evaluate.method == ScoreMethod::gnn) {
      manifest.begin_stage("train");
      const auto labeled = attach_labels(data.records, data.graphs);
      say(log, "training on " + std::to_string(r.split.train.size()) + " questions, validating on " +
                   std::to_string(r.split.val.size()));
      auto trained = run_train(labeled, r.split, config);
      say(log, "best epoch " + std::to_string(trained.best_epoch) + " of " + std::to_string(trained.log.size()));
      manifest.declare(dir / "model.json");
      save_model(trained.model, dir / "model.json");
      manifest.declare(dir / "train_log.csv");
      write_train_log(trained.log, dir / "train_log.csv");
      model = std::move(trained.model);
      manifest.begin_stage("calibrate");
    } else {
      manifest.begin_stage("baseline");
    }
    const auto scores = run_score(config.evaluate.method, data.records, data.graphs, model ? &*model : nullptr, config);
    manifest.declare(dir / "scores.jsonl");
    write_scores(scores, dir / "scores.jsonl");

    manifest.begin_stage("evaluate");
    r.evaluation = run_evaluate(data.records, scores, r.split, config.evaluate);
    manifest.declare(dir / "report.json");
    manifest.declare(dir / "reliability.csv");
    write_evaluation(r.evaluation, dir / "report.json", dir / "reliability.csv");
    manifest.end_stage();
    return r;
  });
  manifest.write(manifest_path);
  return result;
}

std::string display_name(const MethodSpec& spec) {
  std::string name;
  switch (spec.method) {
    case ScoreMethod::gnn: name = "GNN"; break;
    case ScoreMethod::cluster_freq: name = "ClusterFreq"; break;
    case ScoreMethod::seqlik: name = "SeqLikelihood"; break;
    case ScoreMethod::degree: name = "GraphSpectral"; break;
  }
  switch (spec.posthoc) {
    case PosthocMethod::none: break;
    case PosthocMethod::platt: name += "+Platt"; break;
    case PosthocMethod::isotonic: name += "+Iso"; break;
  }
  return name;
}

namespace {

std::string three_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s.starts_with("0.")) s.erase(0, 1);
  if (s.starts_with("-0.")) s.erase(1, 1);
  return s;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace

std::string format_mean_std(std::span<const double> values) {
  const auto m = mean_std(values);
  return three_decimals(m.mean) + " ± " + three_decimals(m.std);
}

RepeatSummary run_repeat(std::span<const QuestionRecord> records, std::span<const ConsistencyGraph> graphs,
                         const PipelineConfig& config, const Logger& log) {
  RepeatSummary summary;
  summary.runs = config.repeat.runs;
  summary.per_response = config.evaluate.per_response;
  summary.excluded = {"Verbalized", "Self-CheckGPT", "APRICOT"};
  for (const auto& spec : config.repeat.rows) {
    RepeatRow row;
    row.spec = spec;
    row.name = display_name(spec);
    summary.rows.push_back(std::move(row));
  }

  bool needs_gnn = false;
  for (const auto& spec : config.repeat.rows) needs_gnn |= spec.method == ScoreMethod::gnn;
  std::vector<LabeledGraph> labeled;
  if (needs_gnn) labeled = attach_labels(records, graphs);

  // Baseline scores do not depend on the split.
  std::map<ScoreMethod, ScoresFile> cached;
  std::map<ScoreMethod, std::string> failures;
  for (const auto& spec : config.repeat.rows) {
    if (spec.method == ScoreMethod::gnn || cached.contains(spec.method) || failures.contains(spec.method)) continue;
    try {
      cached.emplace(spec.method, run_score(spec.method, records, graphs, nullptr, config));
    } catch (const DataError& e) {
      failures.emplace(spec.method, e.what());
    }
  }

  for (std::size_t r = 0; r < config.repeat.runs; ++r) {
    const std::uint64_t seed = derive_seed(config.split.seed, r);
    summary.split_seeds.push_back(seed);
    const auto split = make_split(question_ids(records), config.split.val_fraction, config.split.test_fraction, seed);

    std::optional<ScoresFile> gnn_scores;
    if (needs_gnn) {
      auto trained = run_train(labeled, split, config);
      say(log, "run " + std::to_string(r + 1) + "/" + std::to_string(config.repeat.runs) + ": trained " +
                   std::to_string(trained.log.size()) + " epochs (best " + std::to_string(trained.best_epoch) + ")");
      gnn_scores = run_score(ScoreMethod::gnn, records, graphs, &trained.model, config);
    }

    for (auto& row : summary.rows) {
      if (!row.computed) continue;
      if (auto f = failures.find(row.spec.method); f != failures.end()) {
        row.computed = false;
        row.reason = f->second;
        continue;
      }
      const ScoresFile& scores = row.spec.method == ScoreMethod::gnn ? *gnn_scores : cached.at(row.spec.method);
      EvaluateConfig ec = config.evaluate;
      ec.posthoc = row.spec.posthoc;
      const auto ev = run_evaluate(records, scores, split, ec);
      row.brier.push_back(ev.report.brier);
      row.auroc.push_back(ev.report.auroc);
      row.ece.push_back(ev.report.ece);
    }
  }
  return summary;
}

std::string format_table(const RepeatSummary& summary) {
  std::string out = "| Method | Brier | AUROC | ECE |\n|---|---|---|---|\n";
  for (const auto& row : summary.rows) {
    if (row.computed) {
      out += "| " + row.name + " | " + format_mean_std(row.brier) + " | " + format_mean_std(row.auroc) + " | " +
             format_mean_std(row.ece) + " |\n";
    } else {
      out += "| " + row.name + " | not computed | not computed | not computed |\n";
    }
  }
  for (const auto& name : summary.excluded) out += "| " + name + " | not computed | not computed | not computed |\n";
  return out;
}

std::string summary_to_json(const RepeatSummary& summary) {
  ordered_json j;
  j["runs"] = summary.runs;
  j["pairs"] = summary.per_response ? "per_response" : "primary";
  j["split_seeds"] = summary.split_seeds;
  auto rows = ordered_json::array();
  for (const auto& row : summary.rows) {
    ordered_json rj;
    rj["method"] = to_string(row.spec);
    rj["name"] = row.name;
    rj["computed"] = row.computed;
    if (!row.computed) {
      rj["reason"] = row.reason;
    } else {
      const auto metric = [](std::span<const double> v) {
        const auto m = mean_std(v);
        return ordered_json{{"mean", m.mean}, {"std", m.std}, {"values", std::vector<double>(v.begin(), v.end())}};
      };
      rj["brier"] = metric(row.brier);
      rj["auroc"] = metric(row.auroc);
      rj["ece"] = metric(row.ece);
    }
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  j["not_computed"] = summary.excluded;
  return j.dump(2);
}

RepeatSummary run_repeat_command(const PipelineConfig& config, const std::string& command, const Logger& log) {
  config.validate();
  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  const fs::path manifest_path = dir / "manifest.json";
  Manifest manifest(dir, command);
  record_seeds(manifest, config);
  manifest.set_seed("repeat_runs", config.repeat.runs);

  RepeatSummary summary = guarded(manifest, manifest_path, [&] {
    auto data = prepare_data(config, manifest, log);
    manifest.begin_stage("repeat");
    auto s = run_repeat(data.records, data.graphs, config, log);
    manifest.declare(dir / "table.md");
    write_text(dir / "table.md", format_table(s));
    manifest.declare(dir / "summary.json");
    write_text(dir / "summary.json", summary_to_json(s) + "\n");
    manifest.end_stage();
    return s;
  });
  manifest.write(manifest_path);
  return summary;
}

}  // namespace graphcal::pipeline
