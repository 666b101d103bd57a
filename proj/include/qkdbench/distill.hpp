#pragma once

// Post-processing: gating and slot matching, sifting, asymptotic key-rate
// bounds (single intensity and vacuum + weak decoy) and dB bookkeeping.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qkdbench/hdbcsync.hpp"
#include "qkdbench/photonsim.hpp"
#include "qkdbench/qbermodel.hpp"

namespace qkdbench::distill {

struct MatchedClick {
  std::uint64_t pulse_index = 0;
  photonsim::Detector detector = photonsim::Detector::H;
  photonsim::Origin origin = photonsim::Origin::signal;
};

struct GateStats {
  std::size_t in_gate = 0;            // detections inside a gate
  std::size_t outside_gate = 0;
  std::size_t outside_run = 0;        // nearest slot not a transmitted pulse
  std::size_t multi_click_slots = 0;  // slots discarded for disagreeing detectors
};

struct MatchResult {
  std::vector<MatchedClick> clicks;  // one per kept slot, increasing pulse index
  GateStats stats;
};

// Assigns each detection to its nearest pulse slot after clock correction,
// keeps it iff |t - slot| <= G/2, and discards slots where more than one
// detector fired. Detections must be sorted by time.
MatchResult gate_and_match(const photonsim::DetectionLog& detections, const hdbcsync::ClockModel& clock,
                           double period_ps, double gate_width_ns, std::uint64_t n_pulses);

struct ClassStats {
  std::uint64_t pulses = 0;
  std::uint64_t clicks = 0;  // kept slots
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t sifted_signal = 0;
  std::uint64_t sifted_noise = 0;

  double gain() const noexcept { return pulses ? static_cast<double>(clicks) / static_cast<double>(pulses) : 0.0; }
  double qber() const noexcept { return sifted ? static_cast<double>(errors) / static_cast<double>(sifted) : 0.0; }
};

struct SiftedBlock {
  std::vector<std::uint8_t> alice_bits;
  std::vector<std::uint8_t> bob_bits;
  std::size_t sifted_count = 0;
  double measured_qber = 0.0;
  std::size_t gated_signal_clicks = 0;
  std::size_t gated_noise_clicks = 0;
  std::vector<ClassStats> classes;
  bool empty = true;
};

// Keeps matched-basis slots. Key bits are collected for `key_class`; the
// per-class statistics cover every intensity class.
SiftedBlock sift(const MatchResult& matched, const photonsim::TxSource& tx,
                 const std::vector<std::uint64_t>& pulses_per_class, std::size_t key_class = 0);

double binary_entropy(double p);

enum class MultiphotonModel { passive, worst_case };
std::string to_string(MultiphotonModel m);
MultiphotonModel multiphoton_model_from_string(const std::string& s);

// Probability that a pulse emits two or more photons.
double multiphoton_emission_probability(double mu);
// Probability that a pulse both carries two or more photons and produces an
// in-gate click, for per-photon transmittance eta and gate capture c.
double multiphoton_click_probability(double mu, double eta, double capture);
double multiphoton_probability(MultiphotonModel model, double mu, double eta, double capture);

// q Q [ Omega (1 - H(E/Omega)) - f H(E) ], Omega = (Q - p_multi) / Q, clamped at 0.
double gllp_rate_single(double q_sift, double gain, double qber, double p_multi, double f_ec);

struct DecoyObservation {
  double mu_signal = 0.5;
  double mu_decoy = 0.08;
  double gain_signal = 0.0;
  double qber_signal = 0.0;
  double gain_decoy = 0.0;
  double qber_decoy = 0.0;
  double gain_vacuum = 0.0;
  double qber_vacuum = 0.5;
};

struct DecoyEstimate {
  double y0 = 0.0;
  double y1_lower = 0.0;
  double e1_upper = 0.5;
  double q1_lower = 0.0;
  bool feasible = false;
  std::string diagnostic;
};

DecoyEstimate decoy_bounds(const DecoyObservation& obs);
// q [ Q1 (1 - H(e1)) - f Q_mu H(E_mu) ], clamped at 0 (per signal-class pulse).
double decoy_rate(const DecoyObservation& obs, const DecoyEstimate& est, double q_sift, double f_ec);

struct KeyRateResult {
  double raw_rate_per_pulse = 0.0;
  double sifted_rate_per_pulse = 0.0;
  double secure_rate_per_pulse = 0.0;
  double skr_bps = 0.0;
  double leakage_bits = 0.0;
  double nskr = 0.0;
};

KeyRateResult make_key_rate(double raw, double sifted, double secure, double rep_rate_hz,
                            double leakage_bits);

double basis_match_probability(double px);

// Closed-form expectations for one operating point.
struct AnalyticInputs {
  qbermodel::SignalModel signal;
  double e_intrinsic = 0.015;
  double e_a = 0.0;
  double basis_bias_px = 0.5;
  double f_ec = 1.2;
  double noise_error_fraction = 0.5;
  MultiphotonModel multiphoton = MultiphotonModel::passive;
};

struct AnalyticPoint {
  double s_gate = 0.0;      // signal click probability per pulse, in gate
  double n_gate = 0.0;      // noise click probability per gate
  double esnr = 0.0;
  double gain = 0.0;
  double qber = 0.0;
  double sifted_rate = 0.0;
  double secure_rate = 0.0;
  double nskr = 0.0;
};

AnalyticPoint analytic_single(const AnalyticInputs& in);

// Expected per-class gains and errors for a vacuum + weak decoy schedule
// (class 0 signal, class 1 decoy, class 2 vacuum).
DecoyObservation analytic_decoy_observation(const AnalyticInputs& in, double mu_signal, double mu_decoy);
// Secure bits per emitted pulse, including the signal-class fraction p_signal.
double analytic_decoy_rate(const AnalyticInputs& in, double mu_signal, double mu_decoy, double p_signal);

struct CurvePoint {
  double loss_db = 0.0;
  double skr = 0.0;
};

std::vector<CurvePoint> mission_projection(const std::vector<CurvePoint>& curve, double shift_right_db,
                                           double shift_up_db);
// Largest loss with a positive rate; NaN if none.
double cutoff_loss_db(const std::vector<CurvePoint>& curve);

enum class GainKind { rate, loss, mu };
double gain_db(double old_value, double new_value, GainKind kind);

}  // namespace qkdbench::distill
