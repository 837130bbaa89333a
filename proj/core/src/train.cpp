#include "graphcal/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "graphcal/errors.hpp"
#include "graphcal/parallel.hpp"
#include "graphcal/random.hpp"

namespace graphcal {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ConfigError("plateau_factor must lie in (0, 1)");
  if (!(min_learning_rate < learning_rate)) throw ConfigError("min_learning_rate must be below learning_rate");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
}

std::vector<LabeledGraph> make_labeled_graphs(std::span<const QuestionRecord> records,
                                              const GraphOptions& options, std::size_t jobs) {
  std::vector<LabeledGraph> out(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& q = records[k];
    out[k].id = q.id;
    out[k].labels.resize(static_cast<Eigen::Index>(q.responses.size()));
    for (std::size_t i = 0; i < q.responses.size(); ++i) {
      if (!q.responses[i].label) {
        throw DataError("question '" + q.id + "' responses[" + std::to_string(i) + "] is unlabeled");
      }
      out[k].labels(static_cast<Eigen::Index>(i)) = *q.responses[i].label;
    }
  }
  parallel_for(records.size(), jobs, [&](std::size_t k) { out[k].graph = build_graph(records[k], options); });
  return out;
}

AdamOptimizer::AdamOptimizer(const GcnModel& model, double beta1, double beta2, double epsilon)
    : m_(GcnParameters::zeros_like(model)),
      v_(GcnParameters::zeros_like(model)),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void AdamOptimizer::step(GcnModel& model, const GcnParameters& grads, double learning_rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon_);
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    update(model.weights[l], m_.weights[l], v_.weights[l], grads.weights[l]);
    update(model.biases[l], m_.biases[l], v_.biases[l], grads.biases[l]);
  }
}

PlateauScheduler::PlateauScheduler(double initial, double factor, std::size_t patience, double floor)
    : rate_(initial), factor_(factor), floor_(floor), patience_(patience) {}

double PlateauScheduler::observe(double loss) {
  if (!best_ || loss < *best_) {
    best_ = loss;
    bad_epochs_ = 0;
    return rate_;
  }
  if (++bad_epochs_ >= patience_) {
    const double next = std::max(rate_ * factor_, floor_);
    if (next < rate_) ++reductions_;
    rate_ = next;
    bad_epochs_ = 0;
  }
  return rate_;
}

SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x5eed));
  rng.shuffle(order);
  auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n >= 2) count = std::clamp<std::size_t>(count, 1, n - 1);
  SplitIndices split;
  split.second.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(count, n)));
  split.first.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(count, n)), order.end());
  std::sort(split.first.begin(), split.first.end());
  std::sort(split.second.begin(), split.second.end());
  return split;
}

namespace {

struct PreparedBatch {
  GraphBatch batch;
  Eigen::VectorXd labels;
};

PreparedBatch prepare(std::span<const LabeledGraph> data, std::span<const std::size_t> members) {
  std::vector<const ConsistencyGraph*> graphs;
  graphs.reserve(members.size());
  Eigen::Index total = 0;
  for (auto i : members) {
    graphs.push_back(&data[i].graph);
    total += data[i].labels.size();
  }
  PreparedBatch out{GraphBatch::from_graphs(graphs), Eigen::VectorXd(total)};
  Eigen::Index row = 0;
  for (auto i : members) {
    out.labels.segment(row, data[i].labels.size()) = data[i].labels;
    row += data[i].labels.size();
  }
  if (out.labels.size() != out.batch.node_count()) throw DataError("label count does not match node count");
  return out;
}

std::vector<PreparedBatch> prepare_all(std::span<const LabeledGraph> data, std::vector<std::size_t> order,
                                       std::size_t batch_size) {
  std::vector<PreparedBatch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, order.size() - start);
    batches.push_back(prepare(data, std::span<const std::size_t>(order).subspan(start, len)));
  }
  return batches;
}

double evaluate_loss(const GcnModel& model, const std::vector<PreparedBatch>& batches, std::size_t graphs) {
  double total = 0.0;
  for (const auto& b : batches) {
    total += cross_entropy_with_logits(forward_logits(model, b.batch), b.labels).loss;
  }
  return graphs == 0 ? 0.0 : total / static_cast<double>(graphs);
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

double mean_loss(const GcnModel& model, std::span<const LabeledGraph> graphs, std::size_t batch_size) {
  return evaluate_loss(model, prepare_all(graphs, iota_n(graphs.size()), batch_size), graphs.size());
}

TrainResult train(std::span<const LabeledGraph> train_set, std::span<const LabeledGraph> val_set,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (val_set.empty()) throw DataError("validation set is empty");
  const auto width = train_set.front().graph.node_features.cols();
  if (width != static_cast<Eigen::Index>(config.dims.input)) {
    throw ConfigError("node feature width " + std::to_string(width) +
                      " does not match model input dimension " + std::to_string(config.dims.input));
  }

  TrainResult result;
  result.model = GcnModel::initialize(config.dims, config.model_seed);
  GcnModel best = result.model;

  AdamOptimizer adam(result.model, config.beta1, config.beta2, config.epsilon);
  PlateauScheduler scheduler(config.learning_rate, config.plateau_factor, config.plateau_patience,
                             config.min_learning_rate);
  const auto val_batches = prepare_all(val_set, iota_n(val_set.size()), config.batch_size);

  Rng shuffle_rng(derive_seed(config.split_seed, 0xba7c4));
  std::vector<std::size_t> order = iota_n(train_set.size());
  std::optional<double> best_val;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = scheduler.rate();
    shuffle_rng.shuffle(order);

    double train_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const PreparedBatch b = prepare(train_set, std::span<const std::size_t>(order).subspan(start, len));
      ForwardCache cache;
      const Eigen::VectorXd logits = forward_logits(result.model, b.batch, &cache);
      LossAndGradient lg = cross_entropy_with_logits(logits, b.labels);
      if (!std::isfinite(lg.loss)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      train_total += lg.loss;
      // Batch objective: mean of per-question losses.
      lg.grad_logits /= static_cast<double>(len);
      adam.step(result.model, backpropagate(result.model, b.batch, cache, lg.grad_logits), lr);
    }

    const double val_loss = evaluate_loss(result.model, val_batches, val_set.size());
    if (!std::isfinite(val_loss)) throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    result.log.push_back({epoch, train_total / static_cast<double>(train_set.size()), val_loss, lr});

    if (!best_val || val_loss < *best_val) {
      best_val = val_loss;
      best = result.model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
    scheduler.observe(val_loss);
  }

  result.model = std::move(best);
  result.best_val_loss = *best_val;
  result.train_predictions.reserve(train_set.size());
  for (const auto& g : train_set) result.train_predictions.push_back(forward(result.model, g.graph));
  return result;
}

TrainResult train(std::span<const LabeledGraph> data, const TrainConfig& config) {
  config.validate();
  if (data.size() < 2) throw DataError("need at least 2 labeled questions to train");
  const SplitIndices split = split_indices(data.size(), config.val_fraction, config.split_seed);
  std::vector<LabeledGraph> train_set, val_set;
  for (auto i : split.first) train_set.push_back(data[i]);
  for (auto i : split.second) val_set.push_back(data[i]);
  TrainResult result = train(train_set, val_set, config);
  result.train_indices = split.first;
  result.val_indices = split.second;
  return result;
}

CalibrationScores calibrate(const GcnModel& model, std::span<const LabeledGraph> graphs) {
  model.check_dims();
  CalibrationScores scores(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Eigen::VectorXd p = forward(model, graphs[i].graph);
    scores[i] = {graphs[i].id, std::vector<double>(p.data(), p.data() + p.size()), graphs[i].graph.primary_index};
  }
  return scores;
}

CalibrationScores calibrate(const GcnModel& model, std::span<const QuestionRecord> records,
                            const GraphOptions& options, std::size_t jobs) {
  model.check_dims();
  CalibrationScores scores(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const ConsistencyGraph g = build_graph(records[i], options);
    const Eigen::VectorXd p = forward(model, g);
    scores[i] = {records[i].id, std::vector<double>(p.data(), p.data() + p.size()), g.primary_index};
  });
  return scores;
}

void write_train_log(const std::vector<TrainLogRow>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write training log '" + path.string() + "'");
  out << "epoch,train_loss,val_loss,learning_rate\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", row.epoch, row.train_loss, row.val_loss,
                  row.learning_rate);
    out << buf;
  }
}

}  // namespace graphcal
