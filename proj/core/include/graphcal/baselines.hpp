#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "graphcal/types.hpp"

namespace graphcal {

/// Size of each response's cluster divided by n.
std::vector<double> cluster_frequency_confidence(const ConsistencyGraph& graph);

/// exp(token_logprob_sum / token_count) per response.
std::vector<double> seq_likelihood_confidence(const QuestionRecord& record);

struct PlattParameters {
  double a = 1.0;
  double b = 0.0;
  std::size_t iterations = 0;
};

/// Logistic fit of sigmoid(a * s + b) by Newton's method with backtracking.
/// Needs both classes present and non-constant scores.
PlattParameters platt_fit(std::span<const double> scores, std::span<const int> labels);
double platt_apply(const PlattParameters& params, double score);

/// Non-decreasing step function over the distinct fitted scores.
struct IsotonicFit {
  std::vector<double> knots;   // distinct scores, ascending
  std::vector<double> values;  // fitted value at each knot

  double operator()(double score) const;
};

/// Pool-adjacent-violators on labels ordered by score; equal scores are
/// merged into one weighted block first.
IsotonicFit isotonic_fit(std::span<const double> scores, std::span<const double> labels);
IsotonicFit isotonic_fit(std::span<const double> scores, std::span<const int> labels);
double isotonic_apply(const IsotonicFit& fit, double score);

struct SpectralConfidence {
  std::vector<double> degree;  // (sum_j w_ij) / n
  double uncertainty = 0.0;    // sum_k max(0, 1 - lambda_k)
  Eigen::VectorXd eigenvalues; // normalized Laplacian, ascending
};

SpectralConfidence graph_spectral_confidence(const ConsistencyGraph& graph);
SpectralConfidence graph_spectral_confidence(const Eigen::MatrixXd& weights);

}  // namespace graphcal
