#pragma once

// Cascade interactive error correction.

#include <cstddef>
#include <cstdint>

#include "qkdbench/bits.hpp"

namespace qkdbench::distill {

struct CascadeConfig {
  int passes = 4;
  int max_passes = 10;       // extra shuffled passes allowed before giving up
  double k1_factor = 0.73;   // first block size = k1_factor / qber
  std::uint64_t seed = 0;    // shared public randomness for shuffles and the check hash
};

struct CascadeResult {
  BitVector corrected;            // Bob's key after correction
  std::size_t leakage_bits = 0;   // parity bits disclosed by Alice
  std::size_t verification_bits = 0;
  std::size_t corrections = 0;
  int passes_run = 0;
  bool failed = false;
};

// Corrects `bob` towards `alice`. Only parities of Alice's key are used on
// her side; the final equality check is a 64-bit universal hash.
CascadeResult cascade_reconcile(const BitVector& alice, const BitVector& bob, double qber_estimate,
                                const CascadeConfig& config = {});

}  // namespace qkdbench::distill
