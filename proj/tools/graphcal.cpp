// graphcal: command-line front end for the calibration pipeline.
//
// Every subcommand accepts --config FILE and repeated --set section.key=value;
// dedicated flags are applied last and win over both.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphcal/checkpoint.hpp"
#include "graphcal/dataset.hpp"
#include "graphcal/errors.hpp"
#include "graphcal/pipeline/config.hpp"
#include "graphcal/pipeline/run.hpp"
#include "graphcal/pipeline/stages.hpp"
#include "graphcal/synthetic.hpp"

namespace fs = std::filesystem;
namespace gp = graphcal::pipeline;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitOther = 1;

int exit_code(graphcal::ErrorKind kind) {
  switch (kind) {
    case graphcal::ErrorKind::config: return kExitConfig;
    case graphcal::ErrorKind::data: return kExitData;
    case graphcal::ErrorKind::numeric:
    case graphcal::ErrorKind::domain: return kExitNumeric;
    case graphcal::ErrorKind::transport: return kExitOther;
  }
  return kExitOther;
}

void log_line(std::string_view message) { std::cerr << "graphcal: " << message << '\n'; }

// Config sources shared by all subcommands.
struct Settings {
  std::optional<std::string> config_file;
  std::optional<std::string> manifest_file;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> flags;  // config key -> value

  gp::PipelineConfig resolve() const {
    gp::Tree tree;
    if (manifest_file) {
      std::ifstream in(*manifest_file);
      if (!in) throw graphcal::ConfigError("cannot open manifest '" + *manifest_file + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw graphcal::ConfigError("manifest '" + *manifest_file + "': " + e.what());
      }
      if (!j.contains("config") || !j.at("config").is_string()) {
        throw graphcal::ConfigError("manifest '" + *manifest_file + "' has no config");
      }
      tree = gp::parse_ini(j.at("config").get<std::string>());
    }
    if (config_file) {
      const auto file_tree = gp::read_ini_file(*config_file);
      for (const auto& [section, body] : file_tree) {
        for (const auto& [key, leaf] : body) tree.put(gp::Tree::path_type(section + "." + key, '.'), leaf.data());
      }
    }
    for (const auto& a : assignments) gp::apply_assignment(tree, a);
    for (const auto& [key, value] : flags) gp::apply_assignment(tree, key + "=" + value);
    return gp::config_from_tree(tree);
  }
};

void add_common(CLI::App* sub, Settings& s) {
  sub->add_option("--config", s.config_file, "INI config file");
  sub->add_option("--set", s.assignments, "Override a config key (section.key=value), repeatable");
}

// A flag that writes one config key.
CLI::Option* bind(CLI::App* sub, Settings& s, const std::string& flag, const std::string& key, const std::string& help) {
  return sub->add_option_function<std::string>(flag, [&s, key](const std::string& v) { s.flags[key] = v; }, help);
}

CLI::Option* bind_switch(CLI::App* sub, Settings& s, const std::string& flag, const std::string& key,
                         const std::string& help) {
  return sub->add_flag_function(flag, [&s, key](std::int64_t) { s.flags[key] = "true"; }, help);
}

void bind_graph(CLI::App* sub, Settings& s) {
  bind(sub, s, "--edge-weights", "graph.edge_weights", "Edge weights: cosine or rouge");
  bind(sub, s, "--k-max", "graph.k_max", "Maximum K-means clusters (default 3)");
  bind(sub, s, "--split-ratio", "graph.split_ratio", "Inertia ratio a further cluster must reach (default 0.75)");
  bind(sub, s, "--seed", "graph.seed", "Clustering seed");
  bind(sub, s, "--jobs", "run.jobs", "Worker threads");
}

void bind_split(CLI::App* sub, Settings& s) {
  bind(sub, s, "--split-seed", "split.seed", "Train/val/test split seed");
  bind(sub, s, "--val-fraction", "split.val_fraction", "Validation share of questions");
  bind(sub, s, "--test-fraction", "split.test_fraction", "Test share of questions");
}

void bind_train(CLI::App* sub, Settings& s) {
  bind(sub, s, "--lr", "train.learning_rate", "Initial learning rate");
  bind(sub, s, "--batch-size", "train.batch_size", "Graphs per mini-batch");
  bind(sub, s, "--max-epochs", "train.max_epochs", "Epoch limit");
  bind(sub, s, "--patience", "train.early_stop_patience", "Epochs without validation improvement before stopping");
  bind(sub, s, "--hidden", "train.hidden", "Hidden sizes, e.g. 256,512,1024");
  bind(sub, s, "--model-seed", "train.model_seed", "Initialization seed");
}

void bind_evaluate(CLI::App* sub, Settings& s) {
  bind(sub, s, "--method", "evaluate.method", "cluster-freq, seqlik, degree or gnn");
  bind(sub, s, "--posthoc", "evaluate.posthoc", "none, platt or isotonic");
  bind(sub, s, "--bins", "evaluate.bins", "Reliability bins (default 10)");
  bind_switch(sub, s, "--per-response", "evaluate.per_response", "Evaluate every response, not only the primary one");
}

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += i == 0 ? std::string("graphcal") : std::string(argv[i]);
  }
  return out;
}

std::vector<graphcal::QuestionRecord> load(const std::string& path) { return graphcal::read_dataset(path); }

std::string default_truths_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + ".truths.jsonl";
}

std::string report_row(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw graphcal::DataError("cannot open report '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw graphcal::DataError("report '" + path.string() + "': " + e.what());
  }
  gp::MethodSpec spec;
  spec.method = gp::parse_score_method(j.value("method", "gnn"));
  spec.posthoc = graphcal::parse_posthoc_method(j.value("posthoc", "none"));
  const auto fmt = [&](const char* key) {
    if (!j.contains(key)) throw graphcal::DataError("report '" + path.string() + "' lacks '" + key + "'");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", j.at(key).get<double>());
    std::string s = buf;
    if (s.starts_with("0.")) s.erase(0, 1);
    return s;
  };
  return "| " + gp::display_name(spec) + " | " + fmt("brier") + " | " + fmt("auroc") + " | " + fmt("ece") + " |\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence calibration of sampled LLM answers with consistency graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "graphcal 0.3.0");

  Settings s;
  std::string in_path, out_path, model_path, log_path, scores_path, split_path, split_out, report_path,
      reliability_path, truths_path;
  std::vector<std::string> reports;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with known correctness");
  add_common(synth, s);
  bind(synth, s, "--questions", "synth.questions", "Number of questions");
  bind(synth, s, "--n", "synth.n", "Responses per question (default 30)");
  bind(synth, s, "--distortion", "synth.distortion", "identity, square or sqrt");
  bind(synth, s, "--seed", "synth.seed", "Generator seed");
  bind(synth, s, "--dimension", "synth.dimension", "Embedding dimension (default 32)");
  synth->add_option("--out", out_path, "Dataset output (JSON lines)")->required();
  synth->add_option("--truths", truths_path, "Ground-truth sidecar (default <out>.truths.jsonl)");

  auto* ingest = app.add_subcommand("ingest", "Pool rephrasings and fill missing embeddings");
  add_common(ingest, s);
  bind(ingest, s, "--mode", "ingest.mode", "precomputed, service or hash");
  bind(ingest, s, "--endpoint", "ingest.endpoint", "Embedding service URL");
  bind(ingest, s, "--dimension", "ingest.dimension", "Hash embedding dimension");
  bind(ingest, s, "--batch-size", "ingest.batch_size", "Texts per service request");
  bind(ingest, s, "--seed", "ingest.seed", "Hash embedding seed");
  ingest->add_option("--in", in_path, "Input dataset")->required();
  ingest->add_option("--out", out_path, "Output dataset")->required();

  auto* label = app.add_subcommand("label", "Assign correctness labels");
  add_common(label, s);
  bind(label, s, "--method", "label.method", "rouge, llm_judge or manual");
  bind(label, s, "--tau", "label.tau", "ROUGE-L threshold (default 0.3)");
  bind(label, s, "--judge-endpoint", "label.judge_endpoint", "LLM judge URL");
  bind(label, s, "--manual", "label.manual_file", "CSV of manual labels (question_id,response_index,label)");
  bind_switch(label, s, "--overwrite", "label.overwrite", "Replace labels that are already present");
  bind(label, s, "--jobs", "run.jobs", "Worker threads");
  label->add_option("--in", in_path, "Input dataset")->required();
  label->add_option("--out", out_path, "Output dataset")->required();

  auto* graph = app.add_subcommand("graph", "Build consistency graphs");
  add_common(graph, s);
  bind_graph(graph, s);
  graph->add_option("--in", in_path, "Embedded dataset")->required();
  graph->add_option("--out", out_path, "Graphs output (JSON lines)")->required();

  auto* train = app.add_subcommand("train", "Train the GCN calibrator");
  add_common(train, s);
  bind_graph(train, s);
  bind_split(train, s);
  bind_train(train, s);
  train->add_option("--in", in_path, "Labeled, embedded dataset")->required();
  train->add_option("--model", model_path, "Model checkpoint output")->required();
  train->add_option("--log", log_path, "Training log CSV output");
  train->add_option("--split", split_path, "Existing split file to train on");
  train->add_option("--split-out", split_out, "Write the split used here");

  auto* calibrate = app.add_subcommand("calibrate", "Score responses with a trained model");
  add_common(calibrate, s);
  bind_graph(calibrate, s);
  calibrate->add_option("--model", model_path, "Model checkpoint")->required();
  calibrate->add_option("--in", in_path, "Embedded dataset")->required();
  calibrate->add_option("--out", out_path, "Scores output")->required();

  auto* baseline = app.add_subcommand("baseline", "Score responses with a baseline estimator");
  add_common(baseline, s);
  bind_graph(baseline, s);
  bind(baseline, s, "--method", "evaluate.method", "cluster-freq, seqlik or degree");
  baseline->add_option("--in", in_path, "Embedded dataset")->required();
  baseline->add_option("--out", out_path, "Scores output")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Compute ECE, Brier and AUROC");
  add_common(evaluate, s);
  bind(evaluate, s, "--posthoc", "evaluate.posthoc", "none, platt or isotonic");
  bind(evaluate, s, "--bins", "evaluate.bins", "Reliability bins (default 10)");
  bind_switch(evaluate, s, "--per-response", "evaluate.per_response", "Evaluate every response");
  evaluate->add_option("--in", in_path, "Labeled dataset")->required();
  evaluate->add_option("--scores", scores_path, "Scores file")->required();
  evaluate->add_option("--split", split_path, "Split file; evaluates its test questions");
  evaluate->add_option("--report", report_path, "report.json output")->required();
  evaluate->add_option("--reliability", reliability_path, "reliability.csv output");

  auto* report = app.add_subcommand("report", "Tabulate report.json files");
  report->add_option("--report", reports, "report.json files")->required();
  report->add_option("--out", out_path, "Write the table here instead of stdout");

  auto* repeat = app.add_subcommand("repeat", "Repeat train/evaluate over R splits and tabulate mean ± std");
  add_common(repeat, s);
  bind(repeat, s, "--runs", "repeat.runs", "Number of splits (default 10)");
  bind(repeat, s, "--rows", "repeat.rows", "Comma list of method[+posthoc] rows");
  bind(repeat, s, "--out-dir", "run.out_dir", "Output directory");
  bind(repeat, s, "--dataset", "run.dataset", "Input dataset (synthetic data when omitted)");
  bind(repeat, s, "--seed", "run.seed", "Master seed");
  bind(repeat, s, "--jobs", "run.jobs", "Worker threads");
  bind_switch(repeat, s, "--per-response", "evaluate.per_response", "Evaluate every response");

  auto* run = app.add_subcommand("run", "Run the whole pipeline from a config");
  add_common(run, s);
  run->add_option("--from-manifest", s.manifest_file, "Reuse the configuration recorded in a manifest");
  bind(run, s, "--out-dir", "run.out_dir", "Output directory");
  bind(run, s, "--dataset", "run.dataset", "Input dataset (synthetic data when omitted)");
  bind(run, s, "--seed", "run.seed", "Master seed");
  bind(run, s, "--jobs", "run.jobs", "Worker threads");
  bind(run, s, "--edge-weights", "graph.edge_weights", "Edge weights: cosine or rouge");
  bind(run, s, "--k-max", "graph.k_max", "Maximum K-means clusters");
  bind_evaluate(run, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = command_line(argc, argv);
  const CLI::App* active = app.get_subcommands().front();
  try {
    if (active == report) {
      std::string table = "| Method | Brier | AUROC | ECE |\n|---|---|---|---|\n";
      for (const auto& r : reports) table += report_row(r);
      if (out_path.empty()) {
        std::cout << table;
      } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw graphcal::DataError("cannot write '" + out_path + "'");
        out << table;
      }
      return 0;
    }

    const gp::PipelineConfig config = s.resolve();

    if (active == synth) {
      const auto ds = gp::run_synth(config);
      graphcal::write_dataset(ds.records, out_path);
      graphcal::write_truths(ds.truths, truths_path.empty() ? default_truths_path(out_path) : truths_path);
    } else if (active == ingest) {
      graphcal::write_dataset(gp::run_ingest(load(in_path), config), out_path);
    } else if (active == label) {
      auto outcome = gp::run_label(load(in_path), config);
      for (const auto& w : outcome.unlabeled) {
        log_line("warning: question '" + w.question_id + "' response " + std::to_string(w.response_index) +
                 " left unlabeled; last judge reply: " + w.last_reply);
      }
      graphcal::write_dataset(outcome.records, out_path);
    } else if (active == graph) {
      const auto records = load(in_path);
      gp::write_graphs(records, gp::run_graphs(records, config), out_path);
    } else if (active == train) {
      const auto records = load(in_path);
      const auto labeled = gp::attach_labels(records, gp::run_graphs(records, config));
      const auto split = split_path.empty() ? gp::run_split(records, config) : gp::read_split(split_path);
      if (!split_out.empty()) gp::write_split(split, split_out);
      const auto result = gp::run_train(labeled, split, config);
      graphcal::save_model(result.model, model_path);
      if (!log_path.empty()) graphcal::write_train_log(result.log, log_path);
      log_line("best validation loss " + std::to_string(result.best_val_loss) + " at epoch " +
               std::to_string(result.best_epoch));
    } else if (active == calibrate) {
      const auto records = load(in_path);
      const auto model = graphcal::load_model(model_path);
      gp::write_scores(gp::run_score(gp::ScoreMethod::gnn, records, gp::run_graphs(records, config), &model, config),
                       out_path);
    } else if (active == baseline) {
      if (config.evaluate.method == gp::ScoreMethod::gnn) {
        throw graphcal::ConfigError("baseline needs --method cluster-freq, seqlik or degree");
      }
      const auto records = load(in_path);
      gp::write_scores(gp::run_score(config.evaluate.method, records, gp::run_graphs(records, config), nullptr, config),
                       out_path);
    } else if (active == evaluate) {
      const auto records = load(in_path);
      const auto scores = gp::read_scores(scores_path);
      std::optional<gp::DatasetSplit> split;
      if (!split_path.empty()) split = gp::read_split(split_path);
      const auto ev = gp::run_evaluate(records, scores, split, config.evaluate);
      {
        std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
        if (!out) throw graphcal::DataError("cannot write '" + report_path + "'");
        out << gp::evaluation_to_json(ev) << '\n';
      }
      if (!reliability_path.empty()) graphcal::write_reliability_csv(ev.report.bins, reliability_path);
      std::printf("ece %.6f  brier %.6f  auroc %.6f  (%zu pairs)\n", ev.report.ece, ev.report.brier, ev.report.auroc,
                  ev.report.count);
    } else if (active == repeat) {
      const auto summary = gp::run_repeat_command(config, command, log_line);
      std::cout << gp::format_table(summary);
    } else if (active == run) {
      const auto result = gp::run_pipeline(config, command, log_line);
      const auto& r = result.evaluation.report;
      std::printf("ece %.6f  brier %.6f  auroc %.6f  (%zu pairs, report in %s)\n", r.ece, r.brier, r.auroc, r.count,
                  (config.out_dir / "report.json").string().c_str());
    }
  } catch (const graphcal::Error& e) {
    std::cerr << "graphcal " << active->get_name() << ": " << graphcal::to_string(e.kind()) << " error: " << e.what()
              << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "graphcal " << active->get_name() << ": error: " << e.what() << '\n';
    return kExitOther;
  }
  return 0;
}
