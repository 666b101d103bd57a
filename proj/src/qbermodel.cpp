#include "qkdbench/qbermodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qkdbench::qbermodel {

namespace {

void require_probability(double e, double hi, const char* what) {
  if (!(e >= 0.0 && e <= hi))
    throw std::invalid_argument(std::string{what} + " outside [0, " + std::to_string(hi) + "]");
}

}  // namespace

void validate(const SignalModel& m) {
  if (!(m.mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(m.gate_width_ns > 0.0)) throw std::invalid_argument("gate width must be positive");
  if (!(m.pulse_fwhm_ns > 0.0)) throw std::invalid_argument("pulse FWHM must be positive");
  if (!(m.rep_rate_hz > 0.0)) throw std::invalid_argument("repetition rate must be positive");
  if (!(m.noise_rate_hz >= 0.0)) throw std::invalid_argument("noise rate must be nonnegative");
  if (!(m.timing_sigma_ns >= 0.0)) throw std::invalid_argument("timing sigma must be nonnegative");
  duty_cycle(m.gate_width_ns, m.rep_rate_hz);
}

double combine_error(double e1, double e2) {
  require_probability(e1, 1.0, "error probability");
  require_probability(e2, 1.0, "error probability");
  return e1 + e2 - 2.0 * e1 * e2;
}

double intrinsic_qber(double e_sp, double e_pbs) {
  require_probability(e_sp, 0.5, "e_sp");
  require_probability(e_pbs, 0.5, "e_pbs");
  return combine_error(e_sp, e_pbs);
}

double external_qber(double e_a, double e_n, double e_dcr) {
  require_probability(e_a, 0.5, "e_a");
  require_probability(e_n, 0.5, "e_n");
  require_probability(e_dcr, 0.5, "e_dcr");
  require_probability(e_n + e_dcr, 0.5, "e_n + e_dcr");
  return combine_error(e_a, e_n + e_dcr);
}

double total_qber(double e_i, double e_e) {
  require_probability(e_i, 0.5, "e_i");
  require_probability(e_e, 0.5, "e_e");
  return combine_error(e_i, e_e);
}

QberBreakdown compose(double e_sp, double e_pbs, double e_a, double e_n, double e_dcr) {
  QberBreakdown b{e_sp, e_pbs, e_a, e_n, e_dcr, 0.0, 0.0, 0.0};
  b.e_i = intrinsic_qber(e_sp, e_pbs);
  b.e_e = external_qber(e_a, e_n, e_dcr);
  b.qber = total_qber(b.e_i, b.e_e);
  return b;
}

double duty_cycle(double gate_width_ns, double rep_rate_hz) {
  const double d = gate_width_ns * 1e-9 * rep_rate_hz;
  // Tolerate the rounding in e.g. 40 ns * 25 MHz.
  if (d > 1.0 + 1e-12) throw std::invalid_argument("duty cycle exceeds 1 (gate wider than the pulse period)");
  return d;
}

double sigma_total_ns(double pulse_fwhm_ns, double timing_sigma_ns) {
  const double sp = pulse_fwhm_ns / kFwhmPerSigma;
  return std::sqrt(sp * sp + timing_sigma_ns * timing_sigma_ns);
}

double gate_capture_fraction(double pulse_fwhm_ns, double gate_width_ns, double timing_sigma_ns) {
  if (!(pulse_fwhm_ns > 0.0) || !(gate_width_ns >= 0.0) || !(timing_sigma_ns >= 0.0))
    throw std::invalid_argument("gate_capture_fraction: nonpositive input");
  if (std::isinf(gate_width_ns)) return 1.0;
  const double s = sigma_total_ns(pulse_fwhm_ns, timing_sigma_ns);
  return std::erf(gate_width_ns / (2.0 * std::numbers::sqrt2 * s));
}

double signal_per_gate(const SignalModel& m) {
  const double eta = std::pow(10.0, -m.total_loss_db / 10.0);
  return m.mu * eta * gate_capture_fraction(m.pulse_fwhm_ns, m.gate_width_ns, m.timing_sigma_ns);
}

double noise_per_gate(const SignalModel& m) { return m.noise_rate_hz * m.gate_width_ns * 1e-9; }

double esnr(const SignalModel& m) {
  const double n = noise_per_gate(m);
  if (n <= 0.0) return kInfiniteEsnr;
  return signal_per_gate(m) / n;
}

double qber_from_esnr(double esnr_value, double e_intrinsic, double noise_error_fraction) {
  if (!(esnr_value >= 0.0)) throw std::invalid_argument("ESNR must be nonnegative");
  require_probability(noise_error_fraction, 1.0, "noise_error_fraction");
  const double noise_fraction = std::isinf(esnr_value) ? 0.0 : 1.0 / (esnr_value + 1.0);
  return combine_error(e_intrinsic, noise_error_fraction * noise_fraction);
}

}  // namespace qkdbench::qbermodel
