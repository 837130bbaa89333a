#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphcal/gcn.hpp"
#include "graphcal/graph.hpp"
#include "graphcal/types.hpp"

namespace graphcal {

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  double plateau_factor = 0.9;
  std::size_t plateau_patience = 10;
  double min_learning_rate = 1e-7;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 500;
  std::size_t early_stop_patience = 50;
  std::uint64_t split_seed = 0;
  double val_fraction = 0.1;
  GcnDims dims;
  std::uint64_t model_seed = 0;

  void validate() const;
};

/// A graph with one binary label per node.
struct LabeledGraph {
  std::string id;
  ConsistencyGraph graph;
  Eigen::VectorXd labels;
};

/// Builds graphs for every record; every response must be labeled
/// (DataError otherwise). Graphs are built on up to `jobs` threads.
std::vector<LabeledGraph> make_labeled_graphs(std::span<const QuestionRecord> records,
                                              const GraphOptions& options, std::size_t jobs = 1);

class AdamOptimizer {
 public:
  AdamOptimizer(const GcnModel& model, double beta1, double beta2, double epsilon);
  void step(GcnModel& model, const GcnParameters& grads, double learning_rate);
  std::uint64_t steps() const { return t_; }

 private:
  GcnParameters m_, v_;
  double beta1_, beta2_, epsilon_;
  std::uint64_t t_ = 0;
};

/// Multiplies the rate by `factor` once the monitored loss has failed to
/// improve for `patience` consecutive epochs, never going below `floor`.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial, double factor, std::size_t patience, double floor);
  /// Feed one epoch's validation loss; returns the rate for the next epoch.
  double observe(double loss);
  double rate() const { return rate_; }
  std::size_t reductions() const { return reductions_; }

 private:
  double rate_, factor_, floor_;
  std::size_t patience_;
  std::size_t bad_epochs_ = 0;
  std::size_t reductions_ = 0;
  std::optional<double> best_;
};

struct TrainLogRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-question loss over the epoch's batches
  double val_loss = 0.0;    // mean per-question loss after the epoch
  double learning_rate = 0.0;  // rate used during the epoch
};

struct TrainResult {
  GcnModel model;  // parameters with the best validation loss
  std::vector<TrainLogRow> log;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  /// Probabilities of the returned model on the training graphs, in
  /// train_indices order.
  std::vector<Eigen::VectorXd> train_predictions;
};

struct SplitIndices {
  std::vector<std::size_t> first;   // complement of `second`, ascending
  std::vector<std::size_t> second;  // round(fraction * n) items, ascending
};

/// Seeded random partition of 0..n-1.
SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed);

/// Splits by config.split_seed / val_fraction, then trains.
TrainResult train(std::span<const LabeledGraph> data, const TrainConfig& config);

/// Trains on explicitly given train/validation sets.
TrainResult train(std::span<const LabeledGraph> train_set, std::span<const LabeledGraph> val_set,
                  const TrainConfig& config);

/// Mean per-question loss of `model` on `graphs`.
double mean_loss(const GcnModel& model, std::span<const LabeledGraph> graphs, std::size_t batch_size);

/// Per-question forward passes; primary_index taken from each graph.
CalibrationScores calibrate(const GcnModel& model, std::span<const QuestionRecord> records,
                            const GraphOptions& options, std::size_t jobs = 1);
CalibrationScores calibrate(const GcnModel& model, std::span<const LabeledGraph> graphs);

void write_train_log(const std::vector<TrainLogRow>& log, const std::filesystem::path& path);

}  // namespace graphcal
