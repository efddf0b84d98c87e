#pragma once

#include <cstdint>

namespace koopcheck {

// Counter-based uniform generator: the SplitMix64 finalizer applied to
// seed + (counter+1) * 0x9E3779B97F4A7C15. Sample k of a stream is a pure
// function of (seed, k), so prefixes agree across different sample counts
// and sequences reproduce bit-exactly on any platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace koopcheck
