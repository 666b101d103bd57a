#include "qkdbench/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace qkdbench::distill {

namespace {

constexpr double kMaxQber = 0.15;

// One pass: both keys reordered by the pass permutation so that every
// block is a contiguous range.
struct Pass {
  std::size_t block = 0;
  std::vector<std::uint32_t> order;     // permuted slot -> key position
  std::vector<std::uint32_t> slot_of;   // key position -> permuted slot
  BitVector alice;
  BitVector bob;
  std::vector<std::uint8_t> alice_parity;  // per block, disclosed
};

class Reconciler {
 public:
  Reconciler(const BitVector& alice, const BitVector& bob, const CascadeConfig& cfg, double qber)
      : alice_{alice}, bob_{bob}, cfg_{cfg}, rng_{cfg.seed} {
    const double k1 = std::max(1.0, std::round(cfg.k1_factor / qber));
    k1_ = static_cast<std::size_t>(k1);
  }

  void run_pass() {
    const std::size_t n = bob_.size();
    const int p = static_cast<int>(passes_.size());
    Pass pass;
    const double scaled = static_cast<double>(k1_) * std::ldexp(1.0, std::min(p, 40));
    pass.block = std::max<std::size_t>(1, static_cast<std::size_t>(std::min(scaled, static_cast<double>(n))));
    if (p == 0) {
      pass.order.resize(n);
      std::iota(pass.order.begin(), pass.order.end(), 0u);
    } else {
      pass.order = permutation(rng_, Stream::cascade, static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(n));
    }
    pass.slot_of.resize(n);
    for (std::size_t j = 0; j < n; ++j) pass.slot_of[pass.order[j]] = static_cast<std::uint32_t>(j);
    pass.alice = alice_.permuted(pass.order);
    pass.bob = bob_.permuted(pass.order);
    const std::size_t blocks = (n + pass.block - 1) / pass.block;
    pass.alice_parity.resize(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto [lo, hi] = range(pass, b);
      pass.alice_parity[b] = pass.alice.parity(lo, hi);
      ++leakage_;
    }
    passes_.push_back(std::move(pass));

    const auto& cur = passes_.back();
    for (std::size_t b = 0; b < cur.alice_parity.size(); ++b) push_if_odd(p, b);
    mismatches_ += queue_.size();
    drain();
  }

  std::size_t mismatches() const noexcept { return mismatches_; }

  bool keys_match() {
    verification_ += 64;
    return polynomial_hash(alice_, cfg_.seed) == polynomial_hash(bob_, cfg_.seed);
  }

  CascadeResult result(bool failed) const {
    CascadeResult r;
    r.corrected = bob_;
    r.leakage_bits = leakage_;
    r.verification_bits = verification_;
    r.corrections = corrections_;
    r.passes_run = static_cast<int>(passes_.size());
    r.failed = failed;
    return r;
  }

 private:
  static std::pair<std::size_t, std::size_t> range(const Pass& pass, std::size_t b) {
    const std::size_t lo = b * pass.block;
    return {lo, std::min(lo + pass.block, pass.bob.size())};
  }

  bool odd(const Pass& pass, std::size_t b) const {
    const auto [lo, hi] = range(pass, b);
    return pass.bob.parity(lo, hi) != static_cast<bool>(pass.alice_parity[b]);
  }

  void push_if_odd(int p, std::size_t b) {
    if (odd(passes_[static_cast<std::size_t>(p)], b)) queue_.emplace(passes_[static_cast<std::size_t>(p)].block, p, b);
  }

  // Binary search inside an odd block; returns the key position corrected.
  std::size_t bisect(Pass& pass, std::size_t b) {
    auto [lo, hi] = range(pass, b);
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ++leakage_;
      if (pass.alice.parity(lo, mid) != pass.bob.parity(lo, mid))
        hi = mid;
      else
        lo = mid;
    }
    return pass.order[lo];
  }

  void drain() {
    while (!queue_.empty()) {
      const auto [size, p, b] = queue_.top();
      queue_.pop();
      Pass& pass = passes_[static_cast<std::size_t>(p)];
      if (!odd(pass, b)) continue;
      const std::size_t pos = bisect(pass, b);
      bob_.flip(pos);
      ++corrections_;
      for (std::size_t q = 0; q < passes_.size(); ++q) {
        Pass& other = passes_[q];
        const std::size_t slot = other.slot_of[pos];
        other.bob.flip(slot);
        if (static_cast<int>(q) != p) push_if_odd(static_cast<int>(q), slot / other.block);
      }
    }
  }

  const BitVector& alice_;
  BitVector bob_;
  CascadeConfig cfg_;
  CounterRng rng_;
  std::size_t k1_ = 1;
  std::vector<Pass> passes_;
  // Smallest blocks first.
  std::priority_queue<std::tuple<std::size_t, int, std::size_t>,
                      std::vector<std::tuple<std::size_t, int, std::size_t>>, std::greater<>>
      queue_;
  std::size_t leakage_ = 0;
  std::size_t mismatches_ = 0;  // odd blocks found at pass start
  std::size_t verification_ = 0;
  std::size_t corrections_ = 0;
};

}  // namespace

CascadeResult cascade_reconcile(const BitVector& alice, const BitVector& bob, double qber_estimate,
                                const CascadeConfig& config) {
  if (alice.size() != bob.size()) throw std::invalid_argument("cascade: key lengths differ");
  if (config.passes < 1 || config.max_passes < config.passes)
    throw std::invalid_argument("cascade: invalid pass counts");
  if (!(qber_estimate > 0.0 && qber_estimate <= kMaxQber)) {
    CascadeResult r;
    r.corrected = bob;
    r.failed = true;
    return r;
  }
  if (alice.empty()) return CascadeResult{bob, 0, 0, 0, 0, false};

  Reconciler rec{alice, bob, config, qber_estimate};
  rec.run_pass();
  // A first pass without a single odd block stops at the hash check.
  if (rec.mismatches() == 0 && rec.keys_match()) return rec.result(false);
  for (int p = 1; p < config.passes; ++p) rec.run_pass();
  if (rec.keys_match()) return rec.result(false);
  for (int p = config.passes; p < config.max_passes; ++p) {
    rec.run_pass();
    if (rec.keys_match()) return rec.result(false);
  }
  return rec.result(true);
}

}  // namespace qkdbench::distill
