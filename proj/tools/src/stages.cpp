#include "graphcal/pipeline/stages.hpp"

#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "graphcal/baselines.hpp"
#include "graphcal/dataset.hpp"
#include "graphcal/embedding.hpp"
#include "graphcal/errors.hpp"
#include "graphcal/graph.hpp"
#include "graphcal/parallel.hpp"
#include "graphcal/posthoc.hpp"

namespace graphcal::pipeline {

using ordered_json = nlohmann::ordered_json;

namespace {

bool fully_labeled(const QuestionRecord& q) {
  for (const auto& r : q.responses) {
    if (!r.label) return false;
  }
  return true;
}

std::unordered_map<std::string, std::size_t> index_by_id(std::span<const QuestionRecord> records) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].id, i);
  return index;
}

template <class T>
std::vector<T> pick(std::span<const T> items, const std::vector<std::string>& ids,
                    const std::unordered_map<std::string, std::size_t>& index, const char* what) {
  std::vector<T> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError(std::string(what) + ": question '" + id + "' is not in the dataset");
    out.push_back(items[it->second]);
  }
  return out;
}

}  // namespace

SyntheticDataset run_synth(const PipelineConfig& config) { return generate(config.synth); }

std::vector<QuestionRecord> run_ingest(std::vector<QuestionRecord> records, const PipelineConfig& config) {
  for (auto& q : records) q = pool_multi_prompt(std::move(q));
  records = embed_dataset(std::move(records), config.embedding);
  require_valid(records);
  return records;
}

LabelOutcome run_label(std::vector<QuestionRecord> records, const PipelineConfig& config, Judge* judge) {
  LabelOutcome outcome;
  const auto& lc = config.labeler;
  switch (lc.method) {
    case LabelMethod::rouge:
      for (auto& q : records) {
        if (lc.overwrite || !fully_labeled(q)) q = label_by_rouge(std::move(q), lc.tau, lc.overwrite);
      }
      break;
    case LabelMethod::llm_judge: {
      std::optional<HttpJudge> http;
      if (!judge) {
        http.emplace(*lc.judge_endpoint, env_value("JUDGE_API_KEY"), lc.retry);
        judge = &*http;
      }
      std::vector<std::vector<JudgeWarning>> warnings(records.size());
      parallel_for(records.size(), config.jobs, [&](std::size_t i) {
        if (!lc.overwrite && fully_labeled(records[i])) return;
        auto result = label_by_llm_judge(std::move(records[i]), lc, *judge);
        records[i] = std::move(result.record);
        warnings[i] = std::move(result.unlabeled);
      });
      for (auto& w : warnings) outcome.unlabeled.insert(outcome.unlabeled.end(), w.begin(), w.end());
      break;
    }
    case LabelMethod::manual:
      if (!config.manual_labels) throw ConfigError("label.method = manual needs label.manual_file");
      break;
  }
  // Manual labels take precedence over any automatic label.
  if (config.manual_labels) records = ingest_manual_labels(std::move(records), *config.manual_labels);
  outcome.records = std::move(records);
  return outcome;
}

std::vector<ConsistencyGraph> run_graphs(std::span<const QuestionRecord> records, const PipelineConfig& config) {
  std::vector<ConsistencyGraph> graphs(records.size());
  parallel_for(records.size(), config.jobs, [&](std::size_t i) {
    if (records[i].responses.size() < 2) {
      throw DataError("question '" + records[i].id + "' needs at least 2 responses for a graph");
    }
    graphs[i] = build_graph(records[i], config.graph);
  });
  return graphs;
}

void write_graphs(std::span<const QuestionRecord> records, std::span<const ConsistencyGraph> graphs,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write graphs '" + path.string() + "'");
  for (std::size_t q = 0; q < graphs.size(); ++q) {
    const auto& g = graphs[q];
    ordered_json j;
    j["id"] = records[q].id;
    j["n"] = g.n;
    j["cluster_sizes"] = g.cluster_sizes;
    j["cluster_of"] = g.cluster_of;
    j["primary_index"] = g.primary_index;
    std::vector<double> w;
    w.reserve(g.n * g.n);
    for (Eigen::Index i = 0; i < g.weights.rows(); ++i) {
      for (Eigen::Index k = 0; k < g.weights.cols(); ++k) w.push_back(g.weights(i, k));
    }
    j["weights"] = std::move(w);
    out << j.dump() << '\n';
  }
}

std::vector<LabeledGraph> attach_labels(std::span<const QuestionRecord> records,
                                        std::span<const ConsistencyGraph> graphs) {
  std::vector<LabeledGraph> out(records.size());
  for (std::size_t q = 0; q < records.size(); ++q) {
    out[q].id = records[q].id;
    out[q].graph = graphs[q];
    out[q].labels.resize(static_cast<Eigen::Index>(records[q].responses.size()));
    for (std::size_t i = 0; i < records[q].responses.size(); ++i) {
      const auto& label = records[q].responses[i].label;
      if (!label) {
        throw DataError("question '" + records[q].id + "' responses[" + std::to_string(i) + "] is unlabeled");
      }
      out[q].labels(static_cast<Eigen::Index>(i)) = *label;
    }
  }
  return out;
}

std::vector<std::string> question_ids(std::span<const QuestionRecord> records) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& q : records) ids.push_back(q.id);
  return ids;
}

DatasetSplit run_split(std::span<const QuestionRecord> records, const PipelineConfig& config) {
  return make_split(question_ids(records), config.split.val_fraction, config.split.test_fraction,
                    config.split.seed);
}

TrainResult run_train(std::span<const LabeledGraph> graphs, const DatasetSplit& split,
                      const PipelineConfig& config) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graphs.size(); ++i) index.emplace(graphs[i].id, i);
  const auto train_set = pick(graphs, split.train, index, "split train");
  const auto val_set = pick(graphs, split.val, index, "split val");
  return train(train_set, val_set, config.train);
}

ScoresFile run_score(ScoreMethod method, std::span<const QuestionRecord> records,
                     std::span<const ConsistencyGraph> graphs, const GcnModel* model,
                     const PipelineConfig& config) {
  ScoresFile out;
  out.method = to_string(method);
  out.questions.resize(records.size());
  if (method == ScoreMethod::gnn) {
    if (!model) throw ConfigError("the gnn method needs a trained model");
    model->check_dims();
  }
  parallel_for(records.size(), config.jobs, [&](std::size_t q) {
    auto& sq = out.questions[q];
    sq.scores.id = records[q].id;
    sq.scores.primary_index = graphs[q].primary_index;
    switch (method) {
      case ScoreMethod::gnn: {
        const Eigen::VectorXd p = forward(*model, graphs[q]);
        sq.scores.probabilities.assign(p.data(), p.data() + p.size());
        break;
      }
      case ScoreMethod::cluster_freq:
        sq.scores.probabilities = cluster_frequency_confidence(graphs[q]);
        break;
      case ScoreMethod::seqlik:
        sq.scores.probabilities = seq_likelihood_confidence(records[q]);
        break;
      case ScoreMethod::degree: {
        auto spectral = graph_spectral_confidence(graphs[q]);
        sq.scores.probabilities = std::move(spectral.degree);
        sq.uncertainty = spectral.uncertainty;
        break;
      }
    }
  });
  return out;
}

Evaluation run_evaluate(std::span<const QuestionRecord> records, const ScoresFile& scores,
                        const std::optional<DatasetSplit>& split, const EvaluateConfig& config) {
  const auto index = index_by_id(records);
  std::unordered_map<std::string, const ScoredQuestion*> by_id;
  for (const auto& q : scores.questions) by_id.emplace(q.scores.id, &q);

  const auto collect = [&](const std::vector<std::string>& ids, std::vector<double>& conf, std::vector<int>& labels) {
    for (const auto& id : ids) {
      auto rec = index.find(id);
      if (rec == index.end()) throw DataError("question '" + id + "' is not in the dataset");
      auto sc = by_id.find(id);
      if (sc == by_id.end()) throw DataError("question '" + id + "' has no scores");
      const auto& record = records[rec->second];
      const auto& s = sc->second->scores;
      if (s.probabilities.size() != record.responses.size()) {
        throw DataError("question '" + id + "': " + std::to_string(s.probabilities.size()) + " scores for " +
                        std::to_string(record.responses.size()) + " responses");
      }
      const auto add = [&](std::size_t i) {
        const auto& label = record.responses[i].label;
        if (!label) throw DataError("question '" + id + "' responses[" + std::to_string(i) + "] is unlabeled");
        conf.push_back(s.probabilities[i]);
        labels.push_back(*label);
      };
      if (config.per_response) {
        for (std::size_t i = 0; i < s.probabilities.size(); ++i) add(i);
      } else {
        add(s.primary_index);
      }
    }
  };

  Evaluation ev;
  ev.method = scores.method;
  ev.posthoc = config.posthoc;
  ev.per_response = config.per_response;

  std::vector<std::string> eval_ids;
  if (split) {
    ev.subset = "test";
    eval_ids = split->test;
  } else {
    if (config.posthoc != PosthocMethod::none) {
      throw ConfigError("post-hoc calibration needs a train/test split to fit on");
    }
    ev.subset = "all";
    eval_ids = question_ids(records);
  }
  ev.questions = eval_ids.size();

  std::vector<double> conf;
  std::vector<int> labels;
  collect(eval_ids, conf, labels);

  if (config.posthoc != PosthocMethod::none) {
    std::vector<double> fit_conf;
    std::vector<int> fit_labels;
    collect(split->train, fit_conf, fit_labels);
    const auto calibrator = PosthocCalibrator::fit(config.posthoc, fit_conf, fit_labels, "train");
    conf = calibrator.apply(conf, "test");
  }

  std::vector<ScoredLabel> pairs(conf.size());
  for (std::size_t i = 0; i < conf.size(); ++i) pairs[i] = {conf[i], labels[i]};
  ev.report = evaluate(pairs, config.bins);
  return ev;
}

std::string evaluation_to_json(const Evaluation& ev) {
  ordered_json j;
  j["method"] = ev.method;
  j["posthoc"] = to_string(ev.posthoc);
  j["pairs"] = ev.per_response ? "per_response" : "primary";
  j["subset"] = ev.subset;
  j["questions"] = ev.questions;
  j["ece"] = ev.report.ece;
  j["brier"] = ev.report.brier;
  j["auroc"] = ev.report.auroc;
  j["count"] = ev.report.count;
  auto bins = ordered_json::array();
  for (const auto& b : ev.report.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"mean_confidence", b.mean_confidence},
                    {"accuracy", b.accuracy}});
  }
  j["bins"] = std::move(bins);
  return j.dump(2);
}

void write_evaluation(const Evaluation& ev, const std::filesystem::path& report_json,
                      const std::filesystem::path& reliability_csv) {
  {
    std::ofstream out(report_json, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write report '" + report_json.string() + "'");
    out << evaluation_to_json(ev) << '\n';
  }
  write_reliability_csv(ev.report.bins, reliability_csv);
}

}  // namespace graphcal::pipeline
