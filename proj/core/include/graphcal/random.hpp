#pragma once

// Platform-independent randomness. The standard distributions are
// implementation-defined, so everything that feeds a reproducibility
// contract goes through these helpers instead.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace graphcal {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Combine a seed with a stream/counter value into a new well-mixed seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Counter-based uniform in [0, 1): a pure function of (seed, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller (no cached second value).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace graphcal
