#pragma once

// Seeded Monte Carlo of a weak-coherent-pulse BB84 link: transmitter log,
// lossy channel, background and dark counts, timing jitter and a passive
// four-detector receiver.

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "qkdbench/qbermodel.hpp"
#include "qkdbench/rng.hpp"

namespace qkdbench::photonsim {

// Z is the rectilinear basis (H/V), X the diagonal basis (D/A).
enum class Basis : std::uint8_t { Z = 0, X = 1 };
enum class Detector : std::uint8_t { H = 0, V = 1, D = 2, A = 3, B = 4 };
enum class Origin : std::uint8_t { signal = 0, background = 1, dark = 2, beacon = 3 };

Detector detector_for(Basis basis, bool value) noexcept;
Basis basis_of(Detector d) noexcept;
bool value_of(Detector d) noexcept;
char to_char(Detector d) noexcept;
std::string_view to_string(Origin o) noexcept;
Detector detector_from_char(char c);
Origin origin_from_string(std::string_view s);

struct Intensity {
  double mu = 0.1;
  double probability = 1.0;
};

struct SimConfig {
  std::uint64_t n_pulses = 10'000'000;
  double mu = 0.1;  // used when intensity_schedule is empty
  std::vector<Intensity> intensity_schedule;
  double pulse_fwhm_ns = 0.9;
  double timing_sigma_ns = 0.015;
  double rep_rate_hz = 25e6;
  double total_loss_db = 30.0;
  double background_rate_hz = 400.0;
  double dark_count_rate_hz = 2300.0;
  double e_sp = 0.015;
  double e_pbs = 0.0;
  double e_a = 0.0;
  double basis_bias_px = 0.5;  // probability of the X basis at both ends
  double dead_time_ns = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t block_pulses = 1u << 18;
};

void validate(const SimConfig& config);
std::vector<Intensity> schedule(const SimConfig& config);
double period_ps(const SimConfig& config);
// Error probability of a signal click measured in the matching basis.
double detection_error(const SimConfig& config);
double noise_rate_hz(const SimConfig& config);
qbermodel::SignalModel signal_model(const SimConfig& config, double gate_width_ns);

struct TxRecord {
  std::uint64_t pulse_index = 0;
  Basis basis = Basis::Z;
  std::uint8_t bit = 0;
  std::uint8_t intensity_class = 0;
  bool operator==(const TxRecord&) const = default;
};

// Random access to the transmitter's log; pulse i is a pure function of
// (seed, i), so the log never has to be materialised.
class TxSource {
 public:
  explicit TxSource(const SimConfig& config);
  TxRecord at(std::uint64_t pulse_index) const;
  std::size_t classes() const noexcept { return cumulative_.size(); }

 private:
  CounterRng rng_;
  double px_;
  std::vector<double> cumulative_;
};

std::vector<TxRecord> generate_tx_stream(const SimConfig& config);

struct DetectionRecord {
  double timestamp_ps = 0.0;
  Detector detector = Detector::H;
  Origin origin = Origin::signal;
  bool operator==(const DetectionRecord&) const = default;
};

// Structure-of-arrays event log; timestamps are contiguous for the kernels.
class DetectionLog {
 public:
  std::size_t size() const noexcept { return timestamp_ps.size(); }
  bool empty() const noexcept { return timestamp_ps.empty(); }
  void reserve(std::size_t n);
  void push_back(const DetectionRecord& r);
  DetectionRecord operator[](std::size_t i) const {
    return {timestamp_ps[i], detector[i], origin[i]};
  }
  static DetectionLog from_records(std::vector<DetectionRecord> records);
  std::vector<DetectionRecord> records() const;
  // Stable sort by timestamp.
  void sort_by_time();
  bool operator==(const DetectionLog&) const = default;

  std::vector<double> timestamp_ps;
  std::vector<Detector> detector;
  std::vector<Origin> origin;
};

struct SimulationResult {
  DetectionLog detections;
  std::vector<std::uint64_t> pulses_per_class;
};

// Simulates pulses [first, last) without sorting or dead-time filtering.
SimulationResult simulate_range(const SimConfig& config, std::uint64_t first, std::uint64_t last);
// Full run: block-parallel over `threads` workers, merged by timestamp.
// Output is identical for any thread count and block size.
SimulationResult simulate_channel(const SimConfig& config, unsigned threads = 1);

struct ClockDistortion {
  double drift = 0.0;  // relative rate error
  double offset_ps = 0.0;
  double jitter_ps = 0.0;
};

// t' = offset + t (1 + drift) + N(0, jitter); re-sorted by time.
DetectionLog apply_clock_distortion(const DetectionLog& log, const ClockDistortion& distortion,
                                    const CounterRng& rng);

void write_detections_csv(std::ostream& out, const DetectionLog& log);
DetectionLog read_detections_csv(std::istream& in);
void write_tx_csv(std::ostream& out, const std::vector<TxRecord>& tx);

}  // namespace qkdbench::photonsim
