#include "vgmgc/nn/rng.hpp"

namespace vgmgc::nn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix64(splitmix64(a) ^ b); }

Rng make_stream(std::uint64_t seed, std::uint64_t epoch, Stream purpose) {
  const std::uint64_t key = mix_seed(mix_seed(seed, epoch), static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return Rng(seq);
}

}  // namespace vgmgc::nn
