#pragma once

// Named, reproducible random streams. Every stream is a pure function of
// (seed, purpose, index), so results do not depend on job scheduling.

#include <cstdint>
#include <random>
#include <string_view>

namespace recurq {

using Rng = std::mt19937_64;

enum class Stream : std::uint32_t { fit = 1, bootstrap = 2, simulate = 3, monte_carlo = 4 };

inline Rng make_stream(std::uint64_t seed, Stream purpose, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

// Derived seed for nested work (e.g. the bootstrap inside a Monte Carlo
// replication).
inline std::uint64_t derive_seed(std::uint64_t seed, Stream purpose, std::uint64_t index) {
  Rng rng = make_stream(seed, purpose, index);
  return rng();
}

}  // namespace recurq
