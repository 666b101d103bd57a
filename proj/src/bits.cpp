#include "qkdbench/bits.hpp"

#include <bit>
#include <stdexcept>

#include "qkdbench/kernels.hpp"

namespace qkdbench {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(p & kMersenne61) + static_cast<std::uint64_t>(p >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

std::uint64_t low_mask(std::size_t bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

BitVector BitVector::from_bits(std::span<const std::uint8_t> bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) v.set(i, true);
  return v;
}

void BitVector::push_back(bool v) {
  if ((size_ & 63) == 0) words_.push_back(0);
  ++size_;
  set(size_ - 1, v);
}

bool BitVector::parity(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size_) throw std::out_of_range("BitVector::parity range");
  if (begin == end) return false;
  const std::size_t wb = begin >> 6;
  const std::size_t we = (end - 1) >> 6;
  const std::uint64_t head = ~low_mask(begin & 63);
  const std::uint64_t tail = low_mask(((end - 1) & 63) + 1);
  if (wb == we) return std::popcount(words_[wb] & head & tail) & 1;
  std::uint64_t acc = (words_[wb] & head) ^ (words_[we] & tail);
  if (we > wb + 1)
    acc ^= kernels::xor_reduce(std::span<const std::uint64_t>(words_.data() + wb + 1, we - wb - 1));
  return std::popcount(acc) & 1;
}

std::size_t BitVector::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::size_t BitVector::hamming_distance(const BitVector& other) const {
  if (other.size_ != size_) throw std::invalid_argument("hamming_distance: size mismatch");
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    c += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  return c;
}

BitVector BitVector::permuted(std::span<const std::uint32_t> order) const {
  if (order.size() != size_) throw std::invalid_argument("permuted: order size mismatch");
  BitVector out(size_);
  for (std::size_t j = 0; j < size_; ++j)
    if (get(order[j])) out.set(j, true);
  return out;
}

std::vector<std::uint8_t> BitVector::to_bits() const {
  std::vector<std::uint8_t> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = get(i) ? 1 : 0;
  return out;
}

std::uint64_t polynomial_hash(const BitVector& bits, std::uint64_t seed) {
  const CounterRng rng{seed};
  const auto w = rng.words(Stream::cascade, 0xFFFF'FFFFull, 0xA5A5u);
  const std::uint64_t base = ((std::uint64_t{w[0]} << 32 | w[1]) % (kMersenne61 - 2)) + 2;
  std::uint64_t h = bits.size() % kMersenne61;
  for (std::uint64_t word : bits.words()) {
    // Split each word into two 32-bit limbs so every limb is < the modulus.
    h = (mulmod61(h, base) + (word & 0xFFFF'FFFFu)) % kMersenne61;
    h = (mulmod61(h, base) + (word >> 32)) % kMersenne61;
  }
  return h;
}

BitVector toeplitz_hash(const BitVector& key, std::size_t out_len, const CounterRng& rng,
                        std::uint64_t tag) {
  const std::size_t n = key.size();
  if (out_len > n) throw std::invalid_argument("toeplitz_hash: output longer than input");
  BitVector out(out_len);
  if (out_len == 0) return out;
  // Diagonal bits t[0 .. n + out_len - 2]; row i uses t[i .. i + n - 1]
  // read against key bits in reverse so that M[i][j] = t[i - j + n - 1].
  const std::size_t m = n + out_len - 1;
  BitVector diag(m);
  for (std::size_t base = 0; base < m; base += 128) {
    const auto w = rng.words(Stream::cascade, (tag << 32) | (base / 128), 0x70E9u);
    for (std::size_t b = 0; b < 128 && base + b < m; ++b)
      if ((w[b >> 5] >> (b & 31)) & 1u) diag.set(base + b, true);
  }
  BitVector rev(n);
  for (std::size_t j = 0; j < n; ++j)
    if (key.get(j)) rev.set(n - 1 - j, true);
  for (std::size_t i = 0; i < out_len; ++i) {
    bool p = false;
    for (std::size_t j = 0; j < n; ++j) p ^= rev.get(j) & diag.get(i + j);
    out.set(i, p);
  }
  return out;
}

}  // namespace qkdbench
