#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qkdbench/kernels.hpp"

namespace qkdbench::kernels {

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("QKDBENCH_SIMD")) {
    const std::string want{env};
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

inline bool use_avx2() noexcept {
#if defined(QKDBENCH_WITH_AVX2)
  return selected().load(std::memory_order_relaxed) == static_cast<int>(Isa::avx2);
#else
  return false;
#endif
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(QKDBENCH_WITH_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept { return static_cast<Isa>(selected().load()); }

void force_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::runtime_error("SIMD variant not supported here: " + std::string{isa_name(isa)});
  selected().store(static_cast<int>(isa));
}

#if defined(QKDBENCH_WITH_AVX2)
#define QKDBENCH_DISPATCH(fn, ...) \
  (use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define QKDBENCH_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void philox_fill(std::uint64_t key, std::uint64_t first_index, std::uint32_t stream,
                 std::uint32_t sub, std::span<std::uint32_t> out) {
  QKDBENCH_DISPATCH(philox_fill, key, first_index, stream, sub, out);
}

void affine_forward(std::span<const double> in, std::span<double> out, double shift,
                    double scale) {
  QKDBENCH_DISPATCH(affine_forward, in, out, shift, scale);
}

void affine_inverse(std::span<const double> in, std::span<double> out, double shift,
                    double scale) {
  QKDBENCH_DISPATCH(affine_inverse, in, out, shift, scale);
}

void gate_classify(std::span<const double> t, double period, double half_gate,
                   std::span<double> slot, std::span<std::uint8_t> keep) {
  QKDBENCH_DISPATCH(gate_classify, t, period, half_gate, slot, keep);
}

std::uint64_t xor_reduce(std::span<const std::uint64_t> words) {
  return QKDBENCH_DISPATCH(xor_reduce, words);
}

#undef QKDBENCH_DISPATCH

}  // namespace qkdbench::kernels
