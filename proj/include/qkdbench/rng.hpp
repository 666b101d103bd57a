#pragma once

// Counter-based randomness. Every draw is a pure function of
// (seed, stream, index, sub), so results do not depend on how work is
// partitioned across blocks or threads.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qkdbench {

enum class Stream : std::uint32_t {
  tx = 1,         // basis, bit, intensity class per pulse
  emission = 2,   // signal click and noise-count uniforms per pulse
  detection = 3,  // receiver basis, error flip, detector tie-break, jitter
  noise = 4,      // per-noise-event time, detector, origin
  clock = 5,      // timestamp jitter in clock distortion
  beacon = 6,     // beacon erasures and jitter
  cascade = 7,    // block permutations
  trial = 8,      // test/acceptance trial sub-seeds
};

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_{seed} {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::array<std::uint32_t, 4> words(Stream stream, std::uint64_t index,
                                     std::uint32_t sub = 0) const;
  // Fills four words per index for indices [first, first + out.size()/4).
  void fill(Stream stream, std::uint64_t first, std::uint32_t sub,
            std::span<std::uint32_t> out) const;

  // Uniform in [0, 1) with 53 bits.
  double uniform(Stream stream, std::uint64_t index, std::uint32_t sub = 0) const;
  // Two independent uniforms from one counter.
  std::array<double, 2> uniform2(Stream stream, std::uint64_t index,
                                 std::uint32_t sub = 0) const;
  // Standard normal (Box-Muller on one counter).
  double normal(Stream stream, std::uint64_t index, std::uint32_t sub = 0) const;

  // Derived generator for an independent sub-experiment.
  CounterRng derive(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
};

inline double unit_from_words(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

double normal_from_uniforms(double u1, double u2) noexcept;

// Poisson variate by CDF inversion; intended for small means (< ~30).
std::uint32_t poisson_from_uniform(double u, double mean) noexcept;

// Deterministic Fisher-Yates permutation of [0, n).
std::vector<std::uint32_t> permutation(const CounterRng& rng, Stream stream, std::uint64_t tag,
                                       std::uint32_t n);

}  // namespace qkdbench
