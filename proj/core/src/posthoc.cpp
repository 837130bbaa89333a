#include "graphcal/posthoc.hpp"

#include "graphcal/errors.hpp"

namespace graphcal {

PosthocMethod parse_posthoc_method(std::string_view name) {
  if (name == "none") return PosthocMethod::none;
  if (name == "platt") return PosthocMethod::platt;
  if (name == "isotonic" || name == "iso") return PosthocMethod::isotonic;
  throw ConfigError("unknown post-hoc calibrator '" + std::string(name) + "'");
}

const char* to_string(PosthocMethod method) noexcept {
  switch (method) {
    case PosthocMethod::none: return "none";
    case PosthocMethod::platt: return "platt";
    case PosthocMethod::isotonic: return "isotonic";
  }
  return "?";
}

PosthocCalibrator PosthocCalibrator::fit(PosthocMethod method, std::span<const double> scores,
                                         std::span<const int> labels, std::string fit_split) {
  if (fit_split.empty()) throw ConfigError("post-hoc calibrator needs a named fitting split");
  PosthocCalibrator c;
  c.method_ = method;
  c.fit_split_ = std::move(fit_split);
  switch (method) {
    case PosthocMethod::platt: c.platt_ = platt_fit(scores, labels); break;
    case PosthocMethod::isotonic: c.isotonic_ = isotonic_fit(scores, labels); break;
    case PosthocMethod::none: break;
  }
  return c;
}

double PosthocCalibrator::map(double score) const {
  switch (method_) {
    case PosthocMethod::platt: return platt_apply(platt_, score);
    case PosthocMethod::isotonic: return isotonic_(score);
    case PosthocMethod::none: return score;
  }
  return score;
}

std::vector<double> PosthocCalibrator::apply(std::span<const double> scores, std::string_view split) const {
  if (split == fit_split_) {
    throw ConfigError("post-hoc calibrator fitted on split '" + fit_split_ + "' cannot be applied to it");
  }
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(map(s));
  return out;
}

std::vector<double> apply_posthoc(std::span<const double> train_scores, std::span<const int> train_labels,
                                  std::span<const double> test_scores, PosthocMethod method) {
  return PosthocCalibrator::fit(method, train_scores, train_labels, "train").apply(test_scores, "test");
}

}  // namespace graphcal
