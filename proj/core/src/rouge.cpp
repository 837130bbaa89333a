#include "graphcal/rouge.hpp"

#include <algorithm>
#include <vector>

#include "graphcal/errors.hpp"

namespace graphcal {

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f1(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) {
    throw DomainError("rouge_l_f1: token lists must be non-empty");
  }
  const std::size_t lcs = lcs_length(candidate, reference);
  if (lcs == 0) return 0.0;
  const double l = static_cast<double>(lcs);
  // 2PR/(P+R) with P = l/|c|, R = l/|r| simplifies to 2l/(|c|+|r|).
  return 2.0 * l / static_cast<double>(candidate.size() + reference.size());
}

}  // namespace graphcal
