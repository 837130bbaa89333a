#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "graphcal/types.hpp"

namespace graphcal {

inline constexpr std::size_t kGcnLayers = 3;

struct GcnDims {
  std::size_t input = 3;
  std::array<std::size_t, kGcnLayers> hidden{256, 512, 1024};

  bool operator==(const GcnDims&) const = default;
};

/// Three graph-convolution layers followed by a per-node linear head.
/// weights[0..2] are the convolution matrices, weights[3] is the
/// (hidden[2] x 1) head; biases match.
struct GcnModel {
  GcnDims dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::uint64_t seed = 0;

  /// Glorot-uniform weights from a counter-based stream, zero biases.
  static GcnModel initialize(const GcnDims& dims, std::uint64_t seed);
  static GcnModel zeros(const GcnDims& dims);

  std::size_t parameter_count() const;
  /// Throws ConfigError if matrix shapes do not chain.
  void check_dims() const;
};

/// Same shapes as a model; used for gradients and optimizer moments.
struct GcnParameters {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static GcnParameters zeros_like(const GcnModel& model);
  void set_zero();
};

/// D^{-1/2} (W + I) D^{-1/2}, D the degree matrix of W + I.
Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& weights);

/// Several graphs treated as one block-diagonal disjoint union.
struct GraphBatch {
  std::vector<Eigen::MatrixXd> adjacency;  // normalized, one block per graph
  std::vector<Eigen::Index> offsets;       // first row of each block; size = graphs + 1
  Eigen::MatrixXd features;                // stacked node features

  static GraphBatch from_graphs(std::span<const ConsistencyGraph* const> graphs);
  static GraphBatch from_graph(const ConsistencyGraph& graph);

  std::size_t graph_count() const { return adjacency.size(); }
  Eigen::Index node_count() const { return features.rows(); }
  /// Applies the block-diagonal operator to `h` (rows aligned with nodes).
  Eigen::MatrixXd propagate(const Eigen::MatrixXd& h) const;
};

/// Intermediate values kept for the backward pass.
struct ForwardCache {
  std::array<Eigen::MatrixXd, kGcnLayers> propagated;  // A * H_l
  std::array<Eigen::MatrixXd, kGcnLayers> activations; // H_{l+1}
  Eigen::VectorXd logits;
};

Eigen::VectorXd forward_logits(const GcnModel& model, const GraphBatch& batch,
                               ForwardCache* cache = nullptr);

/// Per-node correctness probabilities.
Eigen::VectorXd forward(const GcnModel& model, const ConsistencyGraph& graph);
Eigen::VectorXd forward(const GcnModel& model, const GraphBatch& batch);

Eigen::VectorXd sigmoid(const Eigen::VectorXd& logits);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd grad_logits;  // d loss / d logit_i = p_i - y_i
};

/// Summed binary cross-entropy, evaluated stably from logits.
LossAndGradient cross_entropy_with_logits(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels);

/// Gradient of sum_i weight_i * loss_i through the network, given the
/// logit gradient (already scaled) and the forward cache.
GcnParameters backpropagate(const GcnModel& model, const GraphBatch& batch,
                            const ForwardCache& cache, const Eigen::VectorXd& grad_logits);

struct BackwardResult {
  double loss = 0.0;
  GcnParameters gradients;
};

/// Loss of one graph (sum over its nodes) and its exact gradient.
BackwardResult backward(const GcnModel& model, const ConsistencyGraph& graph,
                        const Eigen::VectorXd& labels);

}  // namespace graphcal
