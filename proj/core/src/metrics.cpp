#include "graphcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "graphcal/errors.hpp"

namespace graphcal {

namespace {

void check_pairs(std::span<const ScoredLabel> pairs, const char* who) {
  if (pairs.empty()) throw DomainError(std::string(who) + ": empty pair list");
  for (const auto& p : pairs) {
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
      throw DomainError(std::string(who) + ": confidence outside [0, 1]");
    }
    if (p.label != 0 && p.label != 1) throw DomainError(std::string(who) + ": label must be 0 or 1");
  }
}

}  // namespace

std::size_t bin_index(double confidence, std::size_t bins) {
  if (confidence >= 1.0) return bins - 1;
  const auto b = static_cast<std::size_t>(std::floor(confidence * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

std::vector<ReliabilityBin> reliability_diagram(std::span<const ScoredLabel> pairs, std::size_t bins) {
  check_pairs(pairs, "reliability_diagram");
  if (bins < 1) throw DomainError("reliability_diagram: need at least one bin");
  std::vector<ReliabilityBin> table(bins);
  std::vector<double> conf_sum(bins, 0.0), label_sum(bins, 0.0);
  for (const auto& p : pairs) {
    const std::size_t b = bin_index(p.confidence, bins);
    ++table[b].count;
    conf_sum[b] += p.confidence;
    label_sum[b] += p.label;
  }
  const double total = static_cast<double>(pairs.size());
  for (std::size_t b = 0; b < bins; ++b) {
    auto& row = table[b];
    row.lower = static_cast<double>(b) / static_cast<double>(bins);
    row.upper = static_cast<double>(b + 1) / static_cast<double>(bins);
    if (row.count > 0) {
      row.mean_confidence = conf_sum[b] / static_cast<double>(row.count);
      row.accuracy = label_sum[b] / static_cast<double>(row.count);
    }
    row.fraction_of_total = static_cast<double>(row.count) / total;
  }
  return table;
}

double ece_from_bins(std::span<const ReliabilityBin> bins) {
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  if (total == 0) throw DomainError("ece: empty bin table");
  double value = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    value += static_cast<double>(b.count) / static_cast<double>(total) * std::abs(b.accuracy - b.mean_confidence);
  }
  return value;
}

EceResult ece(std::span<const ScoredLabel> pairs, std::size_t bins) {
  EceResult out;
  out.bins = reliability_diagram(pairs, bins);
  out.value = ece_from_bins(out.bins);
  return out;
}

double brier(std::span<const ScoredLabel> pairs) {
  check_pairs(pairs, "brier");
  double total = 0.0;
  for (const auto& p : pairs) {
    const double d = p.confidence - p.label;
    total += d * d;
  }
  return total / static_cast<double>(pairs.size());
}

double auroc(std::span<const ScoredLabel> pairs) {
  check_pairs(pairs, "auroc");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pairs[a].confidence < pairs[b].confidence; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && pairs[order[j]].confidence == pairs[order[i]].confidence) ++j;
    // Ranks i+1 .. j share their average.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (pairs[order[k]].label == 1) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = pairs.size() - positives;
  if (positives == 0 || negatives == 0) throw DomainError("auroc: need both positive and negative labels");
  const double np = static_cast<double>(positives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

EvalReport evaluate(std::span<const ScoredLabel> pairs, std::size_t bins) {
  EvalReport report;
  auto e = ece(pairs, bins);
  report.ece = e.value;
  report.bins = std::move(e.bins);
  report.brier = brier(pairs);
  report.auroc = auroc(pairs);
  report.count = pairs.size();
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["ece"] = report.ece;
  j["brier"] = report.brier;
  j["auroc"] = report.auroc;
  j["count"] = report.count;
  auto bins = nlohmann::ordered_json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"mean_confidence", b.mean_confidence},
                    {"accuracy", b.accuracy}});
  }
  j["bins"] = std::move(bins);
  return j.dump(2);
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write report '" + path.string() + "'");
  out << report_to_json(report) << '\n';
}

void write_reliability_csv(std::span<const ReliabilityBin> bins, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write reliability table '" + path.string() + "'");
  out << "lower,upper,count,mean_confidence,accuracy,fraction_of_total\n";
  char buf[256];
  for (const auto& b : bins) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g,%.17g,%.17g\n", b.lower, b.upper, b.count,
                  b.mean_confidence, b.accuracy, b.fraction_of_total);
    out << buf;
  }
}

}  // namespace graphcal
