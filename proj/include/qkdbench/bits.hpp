#pragma once

// Packed bit strings for key material.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qkdbench/rng.hpp"

namespace qkdbench {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : words_((n + 63) / 64, 0), size_{n} {}
  static BitVector from_bits(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) noexcept {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    words_[i >> 6] = v ? (words_[i >> 6] | m) : (words_[i >> 6] & ~m);
  }
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  void push_back(bool v);

  // Parity of bits [begin, end).
  bool parity(std::size_t begin, std::size_t end) const;
  std::size_t count() const noexcept;
  std::size_t hamming_distance(const BitVector& other) const;

  // Bits reordered so that result[j] = (*this)[order[j]].
  BitVector permuted(std::span<const std::uint32_t> order) const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::vector<std::uint8_t> to_bits() const;

  bool operator==(const BitVector& other) const = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

// Universal hash of a bit string (mod 2^61 - 1 polynomial, seeded).
std::uint64_t polynomial_hash(const BitVector& bits, std::uint64_t seed);

// Toeplitz-matrix privacy amplification: out_len bits from a random
// (out_len x n) Toeplitz matrix drawn from the cascade stream under `tag`.
BitVector toeplitz_hash(const BitVector& key, std::size_t out_len, const CounterRng& rng,
                        std::uint64_t tag);

}  // namespace qkdbench
