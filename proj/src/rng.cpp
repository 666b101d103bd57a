#include "qkdbench/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "qkdbench/kernels.hpp"

namespace qkdbench {

std::array<std::uint32_t, 4> CounterRng::words(Stream stream, std::uint64_t index,
                                                std::uint32_t sub) const {
  std::array<std::uint32_t, 4> w{};
  kernels::scalar::philox_fill(seed_, index, static_cast<std::uint32_t>(stream), sub, w);
  return w;
}

void CounterRng::fill(Stream stream, std::uint64_t first, std::uint32_t sub,
                      std::span<std::uint32_t> out) const {
  kernels::philox_fill(seed_, first, static_cast<std::uint32_t>(stream), sub, out);
}

double CounterRng::uniform(Stream stream, std::uint64_t index, std::uint32_t sub) const {
  const auto w = words(stream, index, sub);
  return unit_from_words(w[0], w[1]);
}

std::array<double, 2> CounterRng::uniform2(Stream stream, std::uint64_t index,
                                           std::uint32_t sub) const {
  const auto w = words(stream, index, sub);
  return {unit_from_words(w[0], w[1]), unit_from_words(w[2], w[3])};
}

double CounterRng::normal(Stream stream, std::uint64_t index, std::uint32_t sub) const {
  const auto u = uniform2(stream, index, sub);
  return normal_from_uniforms(u[0], u[1]);
}

CounterRng CounterRng::derive(std::uint64_t tag) const {
  const auto w = words(Stream::trial, tag, 0xC0FFEEu);
  return CounterRng{std::uint64_t{w[0]} << 32 | w[1]};
}

double normal_from_uniforms(double u1, double u2) noexcept {
  // 1 - u1 lies in (0, 1], so the log is finite.
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint32_t poisson_from_uniform(double u, double mean) noexcept {
  if (mean <= 0.0) return 0;
  double p = std::exp(-mean);
  double cdf = p;
  std::uint32_t k = 0;
  while (u >= cdf && k < 10000) {
    ++k;
    p *= mean / k;
    cdf += p;
    if (p == 0.0) break;
  }
  return k;
}

std::vector<std::uint32_t> permutation(const CounterRng& rng, Stream stream, std::uint64_t tag,
                                       std::uint32_t n) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i) {
    const double u = rng.uniform(stream, (tag << 32) | i);
    const auto j = static_cast<std::uint32_t>(u * i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace qkdbench
