#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace morphcx {

// mt19937_64 and seed_seq are fully specified by the standard; the standard
// distributions are not, so bounded draws are done here to keep every
// stochastic output identical across standard libraries.
using Rng = std::mt19937_64;

/// Independent stream for (seed, index), e.g. one per permutation replica.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Fisher-Yates; shuffles only the first `prefix` positions when given.
template <class T>
void shuffle(std::span<T> items, Rng& rng,
             std::size_t prefix = static_cast<std::size_t>(-1)) {
  const std::size_t n = items.size();
  const std::size_t stop = prefix < n ? prefix : n;
  for (std::size_t i = 0; i < stop && i + 1 < n; ++i) {
    const std::size_t j = i + uniform_below(rng, n - i);
    using std::swap;
    swap(items[i], items[j]);
  }
}

}  // namespace morphcx
