#include "graphcal/gcn.hpp"

#include <cmath>

#include "graphcal/errors.hpp"
#include "graphcal/random.hpp"

namespace graphcal {

namespace {

std::size_t layer_input(const GcnDims& dims, std::size_t layer) {
  return layer == 0 ? dims.input : dims.hidden[layer - 1];
}

}  // namespace

GcnModel GcnModel::initialize(const GcnDims& dims, std::uint64_t seed) {
  GcnModel model = zeros(dims);
  model.seed = seed;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto& w = model.weights[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    const std::uint64_t stream = derive_seed(seed, l);
    std::uint64_t counter = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = limit * (2.0 * counter_uniform(stream, counter++) - 1.0);
  }
  return model;
}

GcnModel GcnModel::zeros(const GcnDims& dims) {
  if (dims.input == 0) throw ConfigError("GCN input dimension must be positive");
  for (auto h : dims.hidden)
    if (h == 0) throw ConfigError("GCN hidden dimensions must be positive");
  GcnModel model;
  model.dims = dims;
  for (std::size_t l = 0; l < kGcnLayers; ++l) {
    const auto in = static_cast<Eigen::Index>(layer_input(dims, l));
    const auto out = static_cast<Eigen::Index>(dims.hidden[l]);
    model.weights.push_back(Eigen::MatrixXd::Zero(in, out));
    model.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  model.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims.hidden.back()), 1));
  model.biases.push_back(Eigen::VectorXd::Zero(1));
  return model;
}

std::size_t GcnModel::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    total += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return total;
}

void GcnModel::check_dims() const {
  if (weights.size() != kGcnLayers + 1 || biases.size() != kGcnLayers + 1) {
    throw ConfigError("GCN model must have " + std::to_string(kGcnLayers + 1) + " parameter layers");
  }
  for (std::size_t l = 0; l <= kGcnLayers; ++l) {
    const auto in = static_cast<Eigen::Index>(l < kGcnLayers ? layer_input(dims, l) : dims.hidden.back());
    const auto out = static_cast<Eigen::Index>(l < kGcnLayers ? dims.hidden[l] : 1);
    if (weights[l].rows() != in || weights[l].cols() != out || biases[l].size() != out) {
      throw ConfigError("GCN layer " + std::to_string(l) + " has shape " +
                        std::to_string(weights[l].rows()) + "x" + std::to_string(weights[l].cols()) +
                        ", expected " + std::to_string(in) + "x" + std::to_string(out));
    }
  }
}

GcnParameters GcnParameters::zeros_like(const GcnModel& model) {
  GcnParameters p;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    p.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return p;
}

void GcnParameters::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) throw DomainError("adjacency must be square");
  Eigen::MatrixXd a = weights;
  a.diagonal().array() += 1.0;
  const Eigen::VectorXd degree = a.rowwise().sum();
  Eigen::VectorXd inv_sqrt(degree.size());
  for (Eigen::Index i = 0; i < degree.size(); ++i) {
    if (!(degree(i) > 0.0)) throw NumericError("non-positive node degree in adjacency");
    inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) *= inv_sqrt(i) * inv_sqrt(j);
  // Symmetrize exactly; the products above already agree up to rounding.
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) a(j, i) = a(i, j);
  return a;
}

GraphBatch GraphBatch::from_graphs(std::span<const ConsistencyGraph* const> graphs) {
  GraphBatch batch;
  Eigen::Index rows = 0;
  Eigen::Index width = -1;
  batch.offsets.push_back(0);
  for (const auto* g : graphs) {
    if (width < 0) width = g->node_features.cols();
    if (g->node_features.cols() != width) throw ConfigError("graphs in a batch differ in feature width");
    if (static_cast<std::size_t>(g->node_features.rows()) != g->n ||
        static_cast<std::size_t>(g->weights.rows()) != g->n) {
      throw DataError("graph node count does not match its matrices");
    }
    batch.adjacency.push_back(normalized_adjacency(g->weights));
    rows += static_cast<Eigen::Index>(g->n);
    batch.offsets.push_back(rows);
  }
  batch.features.resize(rows, std::max<Eigen::Index>(width, 0));
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    batch.features.middleRows(batch.offsets[i], static_cast<Eigen::Index>(graphs[i]->n)) =
        graphs[i]->node_features;
  }
  return batch;
}

GraphBatch GraphBatch::from_graph(const ConsistencyGraph& graph) {
  const ConsistencyGraph* one = &graph;
  return from_graphs(std::span<const ConsistencyGraph* const>(&one, 1));
}

Eigen::MatrixXd GraphBatch::propagate(const Eigen::MatrixXd& h) const {
  Eigen::MatrixXd out(h.rows(), h.cols());
  for (std::size_t g = 0; g < adjacency.size(); ++g) {
    const Eigen::Index start = offsets[g];
    const Eigen::Index len = offsets[g + 1] - start;
    out.middleRows(start, len).noalias() = adjacency[g] * h.middleRows(start, len);
  }
  return out;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits(i);
    if (z >= 0.0) {
      p(i) = 1.0 / (1.0 + std::exp(-z));
    } else {
      const double e = std::exp(z);
      p(i) = e / (1.0 + e);
    }
  }
  return p;
}

Eigen::VectorXd forward_logits(const GcnModel& model, const GraphBatch& batch, ForwardCache* cache) {
  if (batch.features.cols() != static_cast<Eigen::Index>(model.dims.input)) {
    throw ConfigError("graph feature width " + std::to_string(batch.features.cols()) +
                      " does not match model input dimension " + std::to_string(model.dims.input));
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;

  const Eigen::MatrixXd* h = &batch.features;
  for (std::size_t l = 0; l < kGcnLayers; ++l) {
    c.propagated[l] = batch.propagate(*h);
    Eigen::MatrixXd z = c.propagated[l] * model.weights[l];
    z.rowwise() += model.biases[l].transpose();
    c.activations[l] = z.cwiseMax(0.0);
    h = &c.activations[l];
  }
  c.logits = (*h) * model.weights[kGcnLayers].col(0);
  c.logits.array() += model.biases[kGcnLayers](0);
  return c.logits;
}

Eigen::VectorXd forward(const GcnModel& model, const GraphBatch& batch) {
  return sigmoid(forward_logits(model, batch));
}

Eigen::VectorXd forward(const GcnModel& model, const ConsistencyGraph& graph) {
  return forward(model, GraphBatch::from_graph(graph));
}

LossAndGradient cross_entropy_with_logits(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels) {
  if (logits.size() != labels.size()) throw DomainError("logits and labels differ in length");
  LossAndGradient out;
  out.grad_logits.resize(logits.size());
  const Eigen::VectorXd p = sigmoid(logits);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits(i);
    const double y = labels(i);
    // -[y log s(z) + (1-y) log(1-s(z))] = max(z,0) - y z + log(1 + exp(-|z|))
    out.loss += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
    out.grad_logits(i) = p(i) - y;
  }
  return out;
}

GcnParameters backpropagate(const GcnModel& model, const GraphBatch& batch,
                            const ForwardCache& cache, const Eigen::VectorXd& grad_logits) {
  GcnParameters grads;
  grads.weights.resize(kGcnLayers + 1);
  grads.biases.resize(kGcnLayers + 1);

  const Eigen::MatrixXd& top = cache.activations[kGcnLayers - 1];
  grads.weights[kGcnLayers] = top.transpose() * grad_logits;
  grads.biases[kGcnLayers] = Eigen::VectorXd::Constant(1, grad_logits.sum());

  // dL/dH for the output of the current layer.
  Eigen::MatrixXd grad_h = grad_logits * model.weights[kGcnLayers].col(0).transpose();
  for (std::size_t l = kGcnLayers; l-- > 0;) {
    Eigen::MatrixXd grad_z = grad_h.cwiseProduct(
        (cache.activations[l].array() > 0.0).cast<double>().matrix());
    grads.weights[l] = cache.propagated[l].transpose() * grad_z;
    grads.biases[l] = grad_z.colwise().sum().transpose();
    if (l > 0) {
      // A is symmetric, so A^T (dZ W^T) = A (dZ W^T).
      grad_h = batch.propagate(grad_z * model.weights[l].transpose());
    }
  }
  return grads;
}

BackwardResult backward(const GcnModel& model, const ConsistencyGraph& graph,
                        const Eigen::VectorXd& labels) {
  const GraphBatch batch = GraphBatch::from_graph(graph);
  ForwardCache cache;
  const Eigen::VectorXd logits = forward_logits(model, batch, &cache);
  LossAndGradient lg = cross_entropy_with_logits(logits, labels);
  return {lg.loss, backpropagate(model, batch, cache, lg.grad_logits)};
}

}  // namespace graphcal
