#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace graphcal {

/// Length of the longest common subsequence, O(|a|*|b|) time, O(|b|) space.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Balanced ROUGE-L F-measure. Both lists must be non-empty (DomainError).
double rouge_l_f1(std::span<const std::string> candidate, std::span<const std::string> reference);

}  // namespace graphcal
