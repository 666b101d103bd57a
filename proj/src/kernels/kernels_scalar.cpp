#include "qkdbench/kernels.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "philox_constants.hpp"

namespace qkdbench::kernels::scalar {

using namespace detail;

void philox_fill(std::uint64_t key, std::uint64_t first_index, std::uint32_t stream,
                 std::uint32_t sub, std::span<std::uint32_t> out) {
  if (out.size() % 4 != 0) throw std::invalid_argument("philox_fill: output not a multiple of 4");
  const std::size_t n = out.size() / 4;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t index = first_index + i;
    std::uint32_t c0 = static_cast<std::uint32_t>(index);
    std::uint32_t c1 = static_cast<std::uint32_t>(index >> 32);
    std::uint32_t c2 = stream;
    std::uint32_t c3 = sub;
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < kPhiloxRounds; ++r) {
      const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c0;
      const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c2;
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    out[4 * i + 0] = c0;
    out[4 * i + 1] = c1;
    out[4 * i + 2] = c2;
    out[4 * i + 3] = c3;
  }
}

void affine_forward(std::span<const double> in, std::span<double> out, double shift,
                    double scale) {
  if (out.size() != in.size()) throw std::invalid_argument("affine_forward: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = shift + in[i] * scale;
}

void affine_inverse(std::span<const double> in, std::span<double> out, double shift,
                    double scale) {
  if (out.size() != in.size()) throw std::invalid_argument("affine_inverse: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - shift) / scale;
}

void gate_classify(std::span<const double> t, double period, double half_gate,
                   std::span<double> slot, std::span<std::uint8_t> keep) {
  if (slot.size() != t.size() || keep.size() != t.size())
    throw std::invalid_argument("gate_classify: size mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = std::floor(t[i] / period + 0.5);
    const double residual = t[i] - s * period;
    slot[i] = s;
    keep[i] = std::fabs(residual) <= half_gate ? 1 : 0;
  }
}

std::uint64_t xor_reduce(std::span<const std::uint64_t> words) {
  std::uint64_t acc = 0;
  for (auto w : words) acc ^= w;
  return acc;
}

}  // namespace qkdbench::kernels::scalar
