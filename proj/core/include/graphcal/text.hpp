#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace graphcal {

/// Lowercases, splits on Unicode whitespace and strips leading/trailing
/// punctuation from each token. Tokens that are pure punctuation vanish.
/// Lowercasing covers ASCII, Latin-1, basic Greek and basic Cyrillic; other
/// code points pass through unchanged so the result never depends on locale.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace graphcal
