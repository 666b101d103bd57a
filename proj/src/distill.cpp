#include "qkdbench/distill.hpp"

#include <cmath>
#include <stdexcept>

#include "qkdbench/kernels.hpp"

namespace qkdbench::distill {

using photonsim::Detector;
using photonsim::Origin;

MatchResult gate_and_match(const photonsim::DetectionLog& detections, const hdbcsync::ClockModel& clock,
                           double period_ps, double gate_width_ns, std::uint64_t n_pulses) {
  if (!(period_ps > 0.0)) throw std::invalid_argument("gate_and_match: period must be positive");
  if (!(gate_width_ns > 0.0)) throw std::invalid_argument("gate_and_match: gate width must be positive");
  const std::size_t n = detections.size();
  const std::vector<double> t = hdbcsync::correct_timestamps(clock, detections.timestamp_ps);
  std::vector<double> slot(n);
  std::vector<std::uint8_t> keep(n);
  kernels::gate_classify(t, period_ps, gate_width_ns * 1e3 / 2.0, slot, keep);

  MatchResult out;
  std::size_t i = 0;
  while (i < n) {
    if (!keep[i]) {
      ++out.stats.outside_gate;
      ++i;
      continue;
    }
    // Kept detections of one slot are contiguous because slot is monotone in t.
    const double s = slot[i];
    std::size_t j = i;
    bool multi = false;
    bool any_signal = false;
    const Detector d0 = detections.detector[i];
    for (; j < n && slot[j] == s; ++j) {
      if (!keep[j]) {
        ++out.stats.outside_gate;
        continue;
      }
      ++out.stats.in_gate;
      multi |= detections.detector[j] != d0;
      any_signal |= detections.origin[j] == Origin::signal;
    }
    if (s < 0.0 || s >= static_cast<double>(n_pulses)) {
      ++out.stats.outside_run;
    } else if (multi) {
      ++out.stats.multi_click_slots;
    } else {
      const Origin o = any_signal ? Origin::signal : detections.origin[i];
      out.clicks.push_back({static_cast<std::uint64_t>(s), d0, o});
    }
    i = j;
  }
  return out;
}

SiftedBlock sift(const MatchResult& matched, const photonsim::TxSource& tx,
                 const std::vector<std::uint64_t>& pulses_per_class, std::size_t key_class) {
  SiftedBlock block;
  const std::size_t classes = std::max<std::size_t>(tx.classes(), pulses_per_class.size());
  block.classes.resize(classes);
  for (std::size_t k = 0; k < pulses_per_class.size(); ++k) block.classes[k].pulses = pulses_per_class[k];

  for (const auto& c : matched.clicks) {
    const photonsim::TxRecord r = tx.at(c.pulse_index);
    ClassStats& cs = block.classes[r.intensity_class];
    ++cs.clicks;
    const bool is_signal = c.origin == Origin::signal;
    const bool key = r.intensity_class == key_class;
    if (key) {
      block.gated_signal_clicks += is_signal;
      block.gated_noise_clicks += !is_signal;
    }
    if (photonsim::basis_of(c.detector) != r.basis) continue;
    const bool bob = photonsim::value_of(c.detector);
    ++cs.sifted;
    cs.errors += bob != (r.bit != 0);
    cs.sifted_signal += is_signal;
    cs.sifted_noise += !is_signal;
    if (key) {
      block.alice_bits.push_back(r.bit);
      block.bob_bits.push_back(bob ? 1 : 0);
    }
  }
  block.sifted_count = block.alice_bits.size();
  block.empty = block.sifted_count == 0;
  if (key_class < block.classes.size()) block.measured_qber = block.classes[key_class].qber();
  return block;
}

}  // namespace qkdbench::distill
