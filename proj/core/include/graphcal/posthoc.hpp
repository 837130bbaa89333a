#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphcal/baselines.hpp"

namespace graphcal {

enum class PosthocMethod { none, platt, isotonic };

PosthocMethod parse_posthoc_method(std::string_view name);
const char* to_string(PosthocMethod method) noexcept;

/// A score remapping fitted on one named split. Applying it to the split it
/// was fitted on is refused.
class PosthocCalibrator {
 public:
  static PosthocCalibrator fit(PosthocMethod method, std::span<const double> scores,
                               std::span<const int> labels, std::string fit_split);

  PosthocMethod method() const { return method_; }
  const std::string& fit_split() const { return fit_split_; }
  const PlattParameters& platt() const { return platt_; }
  const IsotonicFit& isotonic() const { return isotonic_; }

  /// Throws ConfigError when `split` equals the fitting split.
  std::vector<double> apply(std::span<const double> scores, std::string_view split) const;
  double map(double score) const;

 private:
  PosthocMethod method_ = PosthocMethod::none;
  PlattParameters platt_;
  IsotonicFit isotonic_;
  std::string fit_split_;
};

/// Fit on (train_scores, train_labels), apply to test_scores.
std::vector<double> apply_posthoc(std::span<const double> train_scores, std::span<const int> train_labels,
                                  std::span<const double> test_scores, PosthocMethod method);

}  // namespace graphcal
