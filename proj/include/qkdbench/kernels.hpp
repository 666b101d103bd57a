#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// kernels::scalar and, where the target supports it, a SIMD variant with
// bit-identical results. The top-level functions dispatch to the variant
// selected at startup (QKDBENCH_SIMD=scalar|avx2 overrides detection).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace qkdbench::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;
// Tests use this to pin a variant; throws if the variant is not supported.
void force_isa(Isa isa);

// Philox4x32-10 over the counters (first_index + i, stream, sub) keyed by
// `key`. Writes four words per counter: out[4*i + j], out.size() % 4 == 0.
void philox_fill(std::uint64_t key, std::uint64_t first_index, std::uint32_t stream,
                 std::uint32_t sub, std::span<std::uint32_t> out);

// out[i] = shift + in[i] * scale
void affine_forward(std::span<const double> in, std::span<double> out, double shift,
                    double scale);
// out[i] = (in[i] - shift) / scale
void affine_inverse(std::span<const double> in, std::span<double> out, double shift,
                    double scale);

// slot[i] = floor(t[i] / period + 0.5); keep[i] = |t[i] - slot[i] * period| <= half_gate
void gate_classify(std::span<const double> t, double period, double half_gate,
                   std::span<double> slot, std::span<std::uint8_t> keep);

std::uint64_t xor_reduce(std::span<const std::uint64_t> words);

namespace scalar {
void philox_fill(std::uint64_t key, std::uint64_t first_index, std::uint32_t stream,
                 std::uint32_t sub, std::span<std::uint32_t> out);
void affine_forward(std::span<const double> in, std::span<double> out, double shift,
                    double scale);
void affine_inverse(std::span<const double> in, std::span<double> out, double shift,
                    double scale);
void gate_classify(std::span<const double> t, double period, double half_gate,
                   std::span<double> slot, std::span<std::uint8_t> keep);
std::uint64_t xor_reduce(std::span<const std::uint64_t> words);
}  // namespace scalar

#if defined(QKDBENCH_WITH_AVX2)
namespace avx2 {
void philox_fill(std::uint64_t key, std::uint64_t first_index, std::uint32_t stream,
                 std::uint32_t sub, std::span<std::uint32_t> out);
void affine_forward(std::span<const double> in, std::span<double> out, double shift,
                    double scale);
void affine_inverse(std::span<const double> in, std::span<double> out, double shift,
                    double scale);
void gate_classify(std::span<const double> t, double period, double half_gate,
                   std::span<double> slot, std::span<std::uint8_t> keep);
std::uint64_t xor_reduce(std::span<const std::uint64_t> words);
}  // namespace avx2
#endif

}  // namespace qkdbench::kernels
