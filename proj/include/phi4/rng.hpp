#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace phi4 {

using Rng = std::mt19937_64;

/// Deterministic generator for a labelled stream, e.g. (seed, epoch, chain).
/// Distinct label tuples give statistically independent streams.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> labels = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (auto l : labels) {
    words.push_back(static_cast<std::uint32_t>(l));
    words.push_back(static_cast<std::uint32_t>(l >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace phi4
