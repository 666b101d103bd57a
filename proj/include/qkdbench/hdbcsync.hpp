#pragma once

// Beacon timing layer: a binary de Bruijn sequence carried by pulse-position
// modulation on the beacon train, window-index decoding under erasures and
// least-squares clock offset/drift recovery.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qkdbench/photonsim.hpp"

namespace qkdbench::hdbcsync {

struct HdbcConfig {
  int order_k = 16;
  double beacon_rate_hz = 100e3;
  double ppm_offset_fraction = 0.25;
};

void validate(const HdbcConfig& config);
double beacon_period_ps(const HdbcConfig& config);

struct ClockModel {
  double offset_ps = 0.0;
  double drift = 0.0;
  double residual_rms_ps = 0.0;
};

// Binary de Bruijn sequence of order k (length 2^k), from a hashed Eulerian
// circuit of the order-(k-1) graph. Deterministic; starts with k zeros.
std::vector<std::uint8_t> debruijn_sequence(int order_k);

// Window-value -> position lookup over a de Bruijn sequence.
class DeBruijnIndex {
 public:
  explicit DeBruijnIndex(int order_k);

  int order() const noexcept { return k_; }
  std::size_t length() const noexcept { return seq_.size(); }
  std::span<const std::uint8_t> sequence() const noexcept { return seq_; }
  std::uint8_t bit(std::uint64_t i) const noexcept { return seq_[i & (seq_.size() - 1)]; }
  // Position whose k-bit window (first bit most significant) equals `value`.
  std::uint32_t position_of(std::uint32_t value) const noexcept { return pos_[value]; }
  std::uint32_t window_at(std::uint64_t i) const noexcept;

 private:
  int k_;
  std::vector<std::uint8_t> seq_;
  std::vector<std::uint32_t> pos_;
};

// One pulse per period; bit 1 is delayed by ppm_offset_fraction of a period.
std::vector<double> encode_beacon(std::span<const std::uint8_t> bits, const HdbcConfig& config,
                                  double start_ps = 0.0);
// Inverse of encode_beacon on a lossless train with a known grid origin.
std::vector<std::uint8_t> decode_bits(std::span<const double> timestamps, const HdbcConfig& config,
                                      double start_ps = 0.0);

enum class BeaconSymbol : std::int8_t { zero = 0, one = 1, erased = -1 };
enum class IndexStatus { ok, ambiguous_window, no_match };

struct IndexResult {
  IndexStatus status = IndexStatus::no_match;
  std::uint32_t index = 0;       // start of the window in the cyclic sequence
  std::size_t placements = 0;    // number of consistent placements found
};

// Locates a window of consecutive beacon periods in the cyclic sequence.
IndexResult decode_index(std::span<const BeaconSymbol> window, const DeBruijnIndex& index);

// Received pulses of one observation window, resolved to relative periods.
struct WindowObservation {
  std::vector<BeaconSymbol> symbols;          // per period from the first pulse
  std::vector<std::int64_t> period_of_pulse;  // -1 when the pulse was rejected
  bool first_bit_known = false;
};

// Classifies pulses by their phase relative to the first one; with no
// other reference the first pulse's bit is resolved when any later pulse
// sits at a different phase.
WindowObservation observe_window(std::span<const double> rx_ps, const HdbcConfig& config);

struct MatchedPair {
  double tx_ps;
  double rx_ps;
};

struct AlignmentReport {
  std::vector<MatchedPair> pairs;
  std::size_t windows = 0;
  std::size_t windows_decoded = 0;
};

// Splits a received beacon stream into windows of `window_periods`, decodes
// each window's absolute index and pairs received pulses with their
// nominal transmit times. The transmit train starts at tx_start_ps with
// sequence index 0; the first decoded window is taken to lie in the first
// cycle and later windows are unwrapped from it.
AlignmentReport align_beacon(std::span<const double> rx_ps, const DeBruijnIndex& index,
                             const HdbcConfig& config, std::size_t window_periods,
                             double tx_start_ps = 0.0);

// Least-squares fit rx = offset + (1 + drift) tx.
ClockModel recover_clock(std::span<const double> tx_ps, std::span<const double> rx_ps);
ClockModel recover_clock(std::span<const MatchedPair> pairs);

// t = (t' - offset) / (1 + drift)
std::vector<double> correct_timestamps(const ClockModel& model, std::span<const double> t_ps);
photonsim::DetectionLog correct_timestamps(const ClockModel& model, const photonsim::DetectionLog& log);

// Transmit times of n_periods beacon pulses carrying the sequence from index 0.
std::vector<double> beacon_transmit_times(std::uint64_t n_periods, const DeBruijnIndex& index,
                                          const HdbcConfig& config, double start_ps = 0.0);

struct BeaconChannel {
  double erasure_probability = 0.0;
  photonsim::ClockDistortion distortion;
};

// Applies independent erasures and the clock distortion; beacon stream draws.
photonsim::DetectionLog receive_beacon(std::span<const double> tx_ps, const BeaconChannel& channel,
                                       const CounterRng& rng);

}  // namespace qkdbench::hdbcsync
