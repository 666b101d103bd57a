#include <immintrin.h>

#include <cmath>
#include <stdexcept>

#include "philox_constants.hpp"
#include "qkdbench/kernels.hpp"

namespace qkdbench::kernels::avx2 {

using namespace detail;

namespace {

// 32x32->64 multiply of all eight lanes, split into low and high halves.
inline void mul_lo_hi(__m256i a, __m256i m, __m256i& lo, __m256i& hi) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

}  // namespace

void philox_fill(std::uint64_t key, std::uint64_t first_index, std::uint32_t stream,
                 std::uint32_t sub, std::span<std::uint32_t> out) {
  if (out.size() % 4 != 0) throw std::invalid_argument("philox_fill: output not a multiple of 4");
  const std::size_t n = out.size() / 4;
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(kPhiloxM1));
  const __m256i w0 = _mm256_set1_epi32(static_cast<int>(kPhiloxW0));
  const __m256i w1 = _mm256_set1_epi32(static_cast<int>(kPhiloxW1));

  std::size_t i = 0;
  alignas(32) std::uint32_t lo_idx[8];
  alignas(32) std::uint32_t hi_idx[8];
  alignas(32) std::uint32_t res[4][8];
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 8; ++l) {
      const std::uint64_t index = first_index + i + static_cast<std::uint64_t>(l);
      lo_idx[l] = static_cast<std::uint32_t>(index);
      hi_idx[l] = static_cast<std::uint32_t>(index >> 32);
    }
    __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo_idx));
    __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi_idx));
    __m256i c2 = _mm256_set1_epi32(static_cast<int>(stream));
    __m256i c3 = _mm256_set1_epi32(static_cast<int>(sub));
    __m256i k0 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(key)));
    __m256i k1 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(key >> 32)));
    for (int r = 0; r < kPhiloxRounds; ++r) {
      __m256i lo0, hi0, lo1, hi1;
      mul_lo_hi(c0, m0, lo0, hi0);
      mul_lo_hi(c2, m1, lo1, hi1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
      k0 = _mm256_add_epi32(k0, w0);
      k1 = _mm256_add_epi32(k1, w1);
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(res[0]), c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(res[1]), c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(res[2]), c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(res[3]), c3);
    std::uint32_t* dst = out.data() + 4 * i;
    for (int l = 0; l < 8; ++l) {
      dst[4 * l + 0] = res[0][l];
      dst[4 * l + 1] = res[1][l];
      dst[4 * l + 2] = res[2][l];
      dst[4 * l + 3] = res[3][l];
    }
  }
  if (i < n) scalar::philox_fill(key, first_index + i, stream, sub, out.subspan(4 * i));
}

void affine_forward(std::span<const double> in, std::span<double> out, double shift,
                    double scale) {
  if (out.size() != in.size()) throw std::invalid_argument("affine_forward: size mismatch");
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vk = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= in.size(); i += 4) {
    const __m256d x = _mm256_loadu_pd(in.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(vs, _mm256_mul_pd(x, vk)));
  }
  for (; i < in.size(); ++i) out[i] = shift + in[i] * scale;
}

void affine_inverse(std::span<const double> in, std::span<double> out, double shift,
                    double scale) {
  if (out.size() != in.size()) throw std::invalid_argument("affine_inverse: size mismatch");
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vk = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= in.size(); i += 4) {
    const __m256d x = _mm256_loadu_pd(in.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_div_pd(_mm256_sub_pd(x, vs), vk));
  }
  for (; i < in.size(); ++i) out[i] = (in[i] - shift) / scale;
}

void gate_classify(std::span<const double> t, double period, double half_gate,
                   std::span<double> slot, std::span<std::uint8_t> keep) {
  if (slot.size() != t.size() || keep.size() != t.size())
    throw std::invalid_argument("gate_classify: size mismatch");
  const __m256d vp = _mm256_set1_pd(period);
  const __m256d vh = _mm256_set1_pd(half_gate);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= t.size(); i += 4) {
    const __m256d x = _mm256_loadu_pd(t.data() + i);
    const __m256d s = _mm256_floor_pd(_mm256_add_pd(_mm256_div_pd(x, vp), half));
    const __m256d residual = _mm256_andnot_pd(sign, _mm256_sub_pd(x, _mm256_mul_pd(s, vp)));
    _mm256_storeu_pd(slot.data() + i, s);
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(residual, vh, _CMP_LE_OQ));
    for (int l = 0; l < 4; ++l) keep[i + l] = static_cast<std::uint8_t>((mask >> l) & 1);
  }
  if (i < t.size())
    scalar::gate_classify(t.subspan(i), period, half_gate, slot.subspan(i), keep.subspan(i));
}

std::uint64_t xor_reduce(std::span<const std::uint64_t> words) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= words.size(); i += 4)
    acc = _mm256_xor_si256(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words.data() + i)));
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t r = lanes[0] ^ lanes[1] ^ lanes[2] ^ lanes[3];
  for (; i < words.size(); ++i) r ^= words[i];
  return r;
}

}  // namespace qkdbench::kernels::avx2
