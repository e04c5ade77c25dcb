#pragma once

// Portable random draws on top of std::mt19937_64.
//
// The standard distributions (uniform_int_distribution, std::shuffle, ...) are
// implementation-defined, so results would differ between standard libraries.
// Everything here consumes raw 64-bit engine outputs with fully specified
// arithmetic, which makes every seeded run reproducible across toolchains.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace setfit {

using Rng = std::mt19937_64;

/// Name recorded in reports so a reader knows which generator produced them.
inline constexpr std::string_view kPrngName = "mt19937_64";

/// 64-bit golden-ratio increment used to separate seed streams.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform integer in [0, n). Rejection sampling removes modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// Fisher-Yates from the back.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// Partial Fisher-Yates: after the call the first k entries are a uniform
/// sample without replacement, in draw order.
template <class T>
void partial_shuffle(std::span<T> items, std::size_t k, Rng& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    using std::swap;
    swap(items[i], items[j]);
  }
}

}  // namespace setfit
