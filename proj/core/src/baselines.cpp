#include "graphcal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphcal/errors.hpp"
#include "graphcal/linalg.hpp"

namespace graphcal {

std::vector<double> cluster_frequency_confidence(const ConsistencyGraph& graph) {
  if (graph.cluster_of.size() != graph.n) throw DataError("graph lacks cluster assignments");
  std::vector<double> out(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) {
    out[i] = static_cast<double>(graph.cluster_sizes.at(static_cast<std::size_t>(graph.cluster_of[i]))) /
             static_cast<double>(graph.n);
  }
  return out;
}

std::vector<double> seq_likelihood_confidence(const QuestionRecord& record) {
  std::vector<double> out;
  out.reserve(record.responses.size());
  for (std::size_t i = 0; i < record.responses.size(); ++i) {
    const auto& r = record.responses[i];
    if (!r.token_logprob_sum || !r.token_count || *r.token_count < 1) {
      throw DataError("question '" + record.id + "' responses[" + std::to_string(i) +
                      "] lacks token_logprob_sum/token_count");
    }
    out.push_back(std::exp(*r.token_logprob_sum / static_cast<double>(*r.token_count)));
  }
  return out;
}

namespace {

void check_binary_pair(std::span<const double> scores, std::size_t labels, const char* who) {
  if (scores.size() != labels) throw DomainError(std::string(who) + ": scores and labels differ in length");
  if (scores.empty()) throw DomainError(std::string(who) + ": empty input");
}

void require_both_classes(std::span<const int> labels, const char* who) {
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DomainError(std::string(who) + ": labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size()) {
    throw DomainError(std::string(who) + ": need at least one positive and one negative label");
  }
}

double log_loss(std::span<const double> s, std::span<const int> y, double a, double b) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double z = a * s[i] + b;
    total += std::max(z, 0.0) - y[i] * z + std::log1p(std::exp(-std::abs(z)));
  }
  return total;
}

}  // namespace

PlattParameters platt_fit(std::span<const double> scores, std::span<const int> labels) {
  check_binary_pair(scores, labels.size(), "platt_fit");
  require_both_classes(labels, "platt_fit");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) throw DomainError("platt_fit: scores are constant");

  PlattParameters p{0.0, 0.0, 0};
  double loss = log_loss(scores, labels, p.a, p.b);
  for (; p.iterations < 100; ++p.iterations) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = p.a * scores[i] + p.b;
      const double q = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      const double r = q - labels[i];
      const double w = q * (1.0 - q);
      ga += r * scores[i];
      gb += r;
      haa += w * scores[i] * scores[i];
      hab += w * scores[i];
      hbb += w;
    }
    if (std::hypot(ga, gb) < 1e-10) break;

    // Tiny ridge keeps the Newton system solvable on separable data.
    const double ridge = 1e-12 * (haa + hbb) + 1e-300;
    haa += ridge;
    hbb += ridge;
    const double det = haa * hbb - hab * hab;
    double da, db;
    if (det > 0.0 && std::isfinite(det)) {
      da = -(hbb * ga - hab * gb) / det;
      db = -(haa * gb - hab * ga) / det;
    } else {
      da = -ga;
      db = -gb;
    }

    double step = 1.0;
    double next = log_loss(scores, labels, p.a + step * da, p.b + step * db);
    const double slope = ga * da + gb * db;
    while (next > loss + 1e-4 * step * slope && step > 1e-10) {
      step *= 0.5;
      next = log_loss(scores, labels, p.a + step * da, p.b + step * db);
    }
    if (step <= 1e-10) break;
    p.a += step * da;
    p.b += step * db;
    loss = next;
  }
  if (!std::isfinite(p.a) || !std::isfinite(p.b)) throw NumericError("platt_fit diverged");
  return p;
}

double platt_apply(const PlattParameters& params, double score) {
  const double z = params.a * score + params.b;
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

IsotonicFit isotonic_fit(std::span<const double> scores, std::span<const double> labels) {
  check_binary_pair(scores, labels.size(), "isotonic_fit");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  struct Block {
    double weight;
    double sum;
    std::size_t first_knot;
    std::size_t last_knot;
    double mean() const { return sum / weight; }
  };

  IsotonicFit fit;
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < order.size();) {
    // Tied scores form one initial block.
    Block b{0.0, 0.0, fit.knots.size(), fit.knots.size()};
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      b.weight += 1.0;
      b.sum += labels[order[i]];
      ++i;
    }
    fit.knots.push_back(s);
    blocks.push_back(b);
    while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block& prev = blocks[blocks.size() - 2];
      prev.weight += blocks.back().weight;
      prev.sum += blocks.back().sum;
      prev.last_knot = blocks.back().last_knot;
      blocks.pop_back();
    }
  }
  fit.values.resize(fit.knots.size());
  for (const auto& b : blocks)
    for (std::size_t k = b.first_knot; k <= b.last_knot; ++k) fit.values[k] = b.mean();
  return fit;
}

IsotonicFit isotonic_fit(std::span<const double> scores, std::span<const int> labels) {
  check_binary_pair(scores, labels.size(), "isotonic_fit");
  require_both_classes(labels, "isotonic_fit");
  std::vector<double> y(labels.begin(), labels.end());
  return isotonic_fit(scores, std::span<const double>(y));
}

double IsotonicFit::operator()(double score) const {
  if (knots.empty()) throw DomainError("isotonic fit is empty");
  if (score <= knots.front()) return values.front();
  if (score >= knots.back()) return values.back();
  // Greatest knot <= score.
  const auto it = std::upper_bound(knots.begin(), knots.end(), score);
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

double isotonic_apply(const IsotonicFit& fit, double score) { return fit(score); }

SpectralConfidence graph_spectral_confidence(const Eigen::MatrixXd& weights) {
  const auto n = weights.rows();
  if (n == 0 || weights.cols() != n) throw DomainError("spectral confidence: weights must be square, n >= 1");
  SpectralConfidence out;
  out.degree.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.degree[static_cast<std::size_t>(i)] = weights.row(i).sum() / static_cast<double>(n);
  out.eigenvalues = symmetric_eigenvalues(normalized_laplacian(weights));
  for (Eigen::Index k = 0; k < out.eigenvalues.size(); ++k) out.uncertainty += std::max(0.0, 1.0 - out.eigenvalues(k));
  return out;
}

SpectralConfidence graph_spectral_confidence(const ConsistencyGraph& graph) {
  return graph_spectral_confidence(graph.weights);
}

}  // namespace graphcal
