#pragma once

#include <cstdint>
#include <random>

namespace vgmgc::nn {

using Rng = std::mt19937_64;

/// Independent stream tags; every random draw in a run belongs to exactly one.
enum class Stream : std::uint64_t {
  init = 1,
  dropout = 2,
  consensus = 3,
  kmeans = 4,
  synth = 5,
  verify = 6,
};

/// Deterministic stream for (seed, epoch, purpose). Streams with different keys are decorrelated.
Rng make_stream(std::uint64_t seed, std::uint64_t epoch, Stream purpose);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Uniform draw in the open interval (0, 1); never returns 0 or 1.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform draw in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform(rng, 0.0, static_cast<double>(n))) % n;
}

}  // namespace vgmgc::nn
