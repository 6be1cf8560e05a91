#pragma once

// Seeded randomness with platform-independent output. The engine is
// std::mt19937_64 (fully specified by the standard); the mapping to
// integers and reals is done here because std:: distributions differ
// between standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace specialism {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound), rejection sampling without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// k distinct values from [0, n) in draw order (partial Fisher-Yates on a
  /// sparse permutation).
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k);

 private:
  std::mt19937_64 engine_;
};

inline std::vector<std::uint32_t> Rng::sample_without_replacement(std::uint32_t n, std::uint32_t k) {
  std::vector<std::uint32_t> out;
  if (k > n) return out;
  out.reserve(k);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> swapped;  // small sparse map
  auto lookup = [&](std::uint32_t i) {
    for (const auto& [key, value] : swapped) {
      if (key == i) return value;
    }
    return i;
  };
  auto assign = [&](std::uint32_t i, std::uint32_t value) {
    for (auto& [key, v] : swapped) {
      if (key == i) {
        v = value;
        return;
      }
    }
    swapped.emplace_back(i, value);
  };
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::uint32_t>(below(n - i));
    const auto vi = lookup(i);
    const auto vj = lookup(j);
    out.push_back(vj);
    assign(j, vi);
    assign(i, vj);
  }
  return out;
}

}  // namespace specialism
