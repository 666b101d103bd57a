#pragma once

// Closed-form QBER composition, gating statistics and effective SNR.

#include <limits>

namespace qkdbench::qbermodel {

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2 ln 2)
inline constexpr double kInfiniteEsnr = std::numeric_limits<double>::infinity();

struct QberBreakdown {
  double e_sp = 0.0;
  double e_pbs = 0.0;
  double e_a = 0.0;
  double e_n = 0.0;
  double e_dcr = 0.0;
  double e_i = 0.0;
  double e_e = 0.0;
  double qber = 0.0;
};

struct SignalModel {
  double mu = 0.1;
  double pulse_fwhm_ns = 0.9;
  double rep_rate_hz = 25e6;
  double noise_rate_hz = 2700.0;  // background + dark, summed over detectors
  double total_loss_db = 30.0;
  double gate_width_ns = 1.0;
  double timing_sigma_ns = 0.0;  // synchronisation jitter, added in quadrature
};

void validate(const SignalModel& model);

// Flip composition of two independent error processes.
double combine_error(double e1, double e2);

double intrinsic_qber(double e_sp, double e_pbs);
double external_qber(double e_a, double e_n, double e_dcr);
double total_qber(double e_i, double e_e);

// Fills the derived e_i, e_e and qber from the five components.
QberBreakdown compose(double e_sp, double e_pbs, double e_a, double e_n, double e_dcr);

double duty_cycle(double gate_width_ns, double rep_rate_hz);

double sigma_total_ns(double pulse_fwhm_ns, double timing_sigma_ns);
double gate_capture_fraction(double pulse_fwhm_ns, double gate_width_ns, double timing_sigma_ns);

// Expected in-gate signal clicks per pulse (small-mu regime).
double signal_per_gate(const SignalModel& m);
// Expected in-gate noise clicks per gate.
double noise_per_gate(const SignalModel& m);
double esnr(const SignalModel& m);

// QBER from ESNR: noise clicks err with probability noise_error_fraction.
double qber_from_esnr(double esnr, double e_intrinsic, double noise_error_fraction = 0.5);

}  // namespace qkdbench::qbermodel
