#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qkdbench/distill.hpp"

namespace qkdbench::distill {

namespace {

// Click statistics of one intensity with noise, double clicks resolved the
// way gate_and_match does: a signal and a noise click survive together only
// when they hit the same detector (probability 1/4).
struct SlotModel {
  double signal_kept;  // slot kept and carries the signal photon
  double noise_kept;   // slot kept with noise only
};

SlotModel slot_model(double s, double n) {
  return {s * (1.0 - n) + s * n / 4.0, n * (1.0 - s)};
}

double transmittance(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

double noise_click_probability(const qbermodel::SignalModel& m) {
  return -std::expm1(-m.noise_rate_hz * m.gate_width_ns * 1e-9);
}

double signal_click_probability(const qbermodel::SignalModel& m, double mu) {
  const double c = qbermodel::gate_capture_fraction(m.pulse_fwhm_ns, m.gate_width_ns, m.timing_sigma_ns);
  return c * -std::expm1(-mu * transmittance(m.total_loss_db));
}

// Sifted fraction and QBER of a slot population: signal clicks sift with
// the basis-match probability q, unpolarised noise clicks with 1/2.
struct Sifted {
  double gain;
  double sifted;
  double qber;
};

Sifted sifted_stats(const SlotModel& s, double q, double e_det, double noise_error_fraction) {
  Sifted out;
  out.gain = s.signal_kept + s.noise_kept;
  out.sifted = q * s.signal_kept + 0.5 * s.noise_kept;
  const double err = e_det * q * s.signal_kept + noise_error_fraction * 0.5 * s.noise_kept;
  out.qber = out.sifted > 0.0 ? err / out.sifted : 0.0;
  return out;
}

}  // namespace

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::string to_string(MultiphotonModel m) { return m == MultiphotonModel::passive ? "passive" : "worst_case"; }

MultiphotonModel multiphoton_model_from_string(const std::string& s) {
  if (s == "passive") return MultiphotonModel::passive;
  if (s == "worst_case") return MultiphotonModel::worst_case;
  throw std::invalid_argument("unknown multiphoton model: " + s);
}

double multiphoton_emission_probability(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
  return -std::expm1(-mu) - mu * std::exp(-mu);
}

double multiphoton_click_probability(double mu, double eta, double capture) {
  if (!(mu >= 0.0) || !(eta >= 0.0 && eta <= 1.0) || !(capture >= 0.0 && capture <= 1.0))
    throw std::invalid_argument("multiphoton_click_probability: argument out of range");
  return std::max(0.0, capture * (-std::expm1(-mu * eta) - mu * eta * std::exp(-mu)));
}

double multiphoton_probability(MultiphotonModel model, double mu, double eta, double capture) {
  return model == MultiphotonModel::passive ? multiphoton_click_probability(mu, eta, capture)
                                            : multiphoton_emission_probability(mu);
}

double gllp_rate_single(double q_sift, double gain, double qber, double p_multi, double f_ec) {
  if (!(f_ec >= 1.0)) throw std::invalid_argument("f_ec must be at least 1");
  if (!(qber >= 0.0)) throw std::invalid_argument("qber must be nonnegative");
  if (!(gain > 0.0) || qber >= 0.5) return 0.0;
  const double omega = std::max(0.0, (gain - p_multi) / gain);
  if (omega <= 0.0) return 0.0;
  const double e1 = std::min(qber / omega, 0.5);
  const double r = q_sift * gain * (omega * (1.0 - binary_entropy(e1)) - f_ec * binary_entropy(qber));
  return std::max(0.0, r);
}

DecoyEstimate decoy_bounds(const DecoyObservation& o) {
  DecoyEstimate est;
  const double mu = o.mu_signal;
  const double nu = o.mu_decoy;
  if (!(nu > 0.0) || !(mu > nu)) {
    est.diagnostic = "decoy intensities must satisfy mu_signal > mu_decoy > 0";
    return est;
  }
  est.y0 = std::clamp(o.gain_vacuum, 0.0, 1.0);
  const double y1 = mu / (mu * nu - nu * nu) *
                    (o.gain_decoy * std::exp(nu) - o.gain_signal * std::exp(mu) * nu * nu / (mu * mu) -
                     (mu * mu - nu * nu) / (mu * mu) * est.y0);
  if (!(y1 > 0.0)) {
    est.diagnostic = "single-photon yield bound is not positive";
    return est;
  }
  est.y1_lower = std::min(y1, 1.0);
  const double e1 = (o.qber_decoy * o.gain_decoy * std::exp(nu) - o.qber_vacuum * est.y0) / (est.y1_lower * nu);
  est.e1_upper = std::clamp(e1, 0.0, 0.5);
  est.q1_lower = est.y1_lower * mu * std::exp(-mu);
  est.feasible = true;
  return est;
}

double decoy_rate(const DecoyObservation& o, const DecoyEstimate& est, double q_sift, double f_ec) {
  if (!(f_ec >= 1.0)) throw std::invalid_argument("f_ec must be at least 1");
  if (!est.feasible || o.qber_signal >= 0.5) return 0.0;
  const double r = q_sift * (est.q1_lower * (1.0 - binary_entropy(est.e1_upper)) -
                             f_ec * o.gain_signal * binary_entropy(o.qber_signal));
  return std::max(0.0, r);
}

KeyRateResult make_key_rate(double raw, double sifted, double secure, double rep_rate_hz, double leakage_bits) {
  KeyRateResult r;
  r.raw_rate_per_pulse = std::max(0.0, raw);
  r.sifted_rate_per_pulse = std::clamp(sifted, 0.0, r.raw_rate_per_pulse);
  r.secure_rate_per_pulse = std::clamp(secure, 0.0, r.sifted_rate_per_pulse);
  r.skr_bps = r.secure_rate_per_pulse * rep_rate_hz;
  r.leakage_bits = leakage_bits;
  r.nskr = r.sifted_rate_per_pulse > 0.0 ? r.secure_rate_per_pulse / r.sifted_rate_per_pulse : 0.0;
  return r;
}

double basis_match_probability(double px) {
  if (!(px >= 0.0 && px <= 1.0)) throw std::invalid_argument("basis probability outside [0, 1]");
  return px * px + (1.0 - px) * (1.0 - px);
}

AnalyticPoint analytic_single(const AnalyticInputs& in) {
  const auto& m = in.signal;
  qbermodel::validate(m);
  const double e_det = qbermodel::combine_error(in.e_intrinsic, in.e_a);
  const double q = basis_match_probability(in.basis_bias_px);
  const double capture = qbermodel::gate_capture_fraction(m.pulse_fwhm_ns, m.gate_width_ns, m.timing_sigma_ns);

  AnalyticPoint p;
  p.s_gate = signal_click_probability(m, m.mu);
  p.n_gate = noise_click_probability(m);
  p.esnr = qbermodel::esnr(m);
  const Sifted s = sifted_stats(slot_model(p.s_gate, p.n_gate), q, e_det, in.noise_error_fraction);
  p.gain = s.gain;
  p.qber = s.qber;
  p.sifted_rate = s.sifted;
  if (s.gain > 0.0) {
    const double p_multi =
        multiphoton_probability(in.multiphoton, m.mu, transmittance(m.total_loss_db), capture);
    p.secure_rate = gllp_rate_single(s.sifted / s.gain, s.gain, s.qber, p_multi, in.f_ec);
  }
  p.nskr = p.sifted_rate > 0.0 ? p.secure_rate / p.sifted_rate : 0.0;
  return p;
}

DecoyObservation analytic_decoy_observation(const AnalyticInputs& in, double mu_signal, double mu_decoy) {
  const auto& m = in.signal;
  const double e_det = qbermodel::combine_error(in.e_intrinsic, in.e_a);
  const double q = basis_match_probability(in.basis_bias_px);
  const double n = noise_click_probability(m);

  DecoyObservation o;
  o.mu_signal = mu_signal;
  o.mu_decoy = mu_decoy;
  const Sifted sig = sifted_stats(slot_model(signal_click_probability(m, mu_signal), n), q, e_det,
                                  in.noise_error_fraction);
  const Sifted dec = sifted_stats(slot_model(signal_click_probability(m, mu_decoy), n), q, e_det,
                                  in.noise_error_fraction);
  o.gain_signal = sig.gain;
  o.qber_signal = sig.qber;
  o.gain_decoy = dec.gain;
  o.qber_decoy = dec.qber;
  o.gain_vacuum = n;
  o.qber_vacuum = in.noise_error_fraction;
  return o;
}

double analytic_decoy_rate(const AnalyticInputs& in, double mu_signal, double mu_decoy, double p_signal) {
  const DecoyObservation o = analytic_decoy_observation(in, mu_signal, mu_decoy);
  const DecoyEstimate est = decoy_bounds(o);
  return p_signal * decoy_rate(o, est, basis_match_probability(in.basis_bias_px), in.f_ec);
}

std::vector<CurvePoint> mission_projection(const std::vector<CurvePoint>& curve, double shift_right_db,
                                           double shift_up_db) {
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].loss_db < curve[i - 1].loss_db)
      throw std::invalid_argument("mission_projection: loss grid must be monotone");
  const double scale = std::pow(10.0, shift_up_db / 10.0);
  std::vector<CurvePoint> out;
  out.reserve(curve.size());
  for (const auto& p : curve) out.push_back({p.loss_db + shift_right_db, p.skr * scale});
  return out;
}

double cutoff_loss_db(const std::vector<CurvePoint>& curve) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : curve)
    if (p.skr > 0.0 && !(p.loss_db <= best)) best = p.loss_db;
  return best;
}

double gain_db(double old_value, double new_value, GainKind kind) {
  if (kind == GainKind::loss) return old_value - new_value;
  if (!(old_value > 0.0) || !(new_value > 0.0)) throw std::invalid_argument("gain_db: values must be positive");
  return 10.0 * std::log10(new_value / old_value);
}

}  // namespace qkdbench::distill
