// Acceptance suite: one pass/fail line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkdbench/cascade.hpp"
#include "qkdbench/distill.hpp"
#include "qkdbench/hdbcsync.hpp"
#include "qkdbench/orbitlink.hpp"
#include "qkdbench/qbermodel.hpp"
#include "qkdbench/runner.hpp"

using namespace qkdbench;
namespace fs = std::filesystem;
namespace rn = qkdbench::runner;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok " : "FAIL ") + what);
  }
  void info(const std::string& what) { notes.push_back("   " + what); }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double axis(const rn::SweepPoint& p) { return p.axis_value.get<double>(); }
double series(const rn::SweepPoint& p) { return p.series_value.get<double>(); }

// First crossing below `level` on a log-x grid, log-interpolated; NaN if none.
double crossing_below(const std::vector<double>& x, const std::vector<double>& y, double level) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (y[i] <= level && y[i - 1] > level) {
      const double f = (y[i - 1] - level) / (y[i - 1] - y[i]);
      return std::exp(std::log(x[i - 1]) + f * (std::log(x[i]) - std::log(x[i - 1])));
    }
  }
  return std::nan("");
}

// No rise after a fall, ignoring relative changes below tol.
bool unimodal(const std::vector<double>& y, double tol = 1e-9) {
  bool falling = false;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double scale = std::max({std::fabs(y[i]), std::fabs(y[i - 1]), 1e-300});
    const double d = (y[i] - y[i - 1]) / scale;
    if (d < -tol) falling = true;
    if (d > tol && falling) return false;
  }
  return true;
}

// Least-squares slope.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

// ---------------------------------------------------------------------------

Verdict geometry_anchors() {
  Verdict v;
  const auto t0 = Clock::now();
  const orbitlink::OrbitConfig orbit;
  const auto link = orbitlink::spoqc_quantum_link();
  const double theta = orbitlink::effective_divergence(link.beam);
  const double d10 = orbitlink::slant_range(10.0, orbit);
  const double d90 = orbitlink::slant_range(90.0, orbit);
  v.check(d10 >= 1685.0 && d10 <= 1705.0, "slant_range(10 deg, 500 km) = " + fmt(d10, 6) + " km in [1685, 1705]");
  const double g_near = orbitlink::geometric_loss_db(theta, d90, link.rx_diameter_m);
  const double g_far = orbitlink::geometric_loss_db(theta, d10, link.rx_diameter_m);
  const double span = g_far - g_near;
  v.check(std::fabs(span - 10.6) <= 0.1, "geometric span 500->" + fmt(d10, 5) + " km = " + fmt(span) + " dB (10.6 +- 0.1)");
  v.check(std::fabs(g_near - 17.1) <= 3.0,
          "geometric loss at 500 km = " + fmt(g_near) + " dB vs 17.1 (+-3), half-angle " + fmt(theta * 1e6) + " urad");
  v.check(std::fabs(g_far - 27.7) <= 3.0, "geometric loss at " + fmt(d10, 5) + " km = " + fmt(g_far) + " dB vs 27.7 (+-3)");
  const double t = seconds_since(t0);
  v.check(t < 1.0, "runtime " + fmt(t, 3) + " s < 1 s");
  return v;
}

Verdict table1_totals() {
  Verdict v;
  using orbitlink::ChannelKind;
  using orbitlink::LossBudget;
  struct Row {
    const char* name;
    LossBudget budget;
    double expected;
  };
  const Row rows[] = {
      {"quantum best", {0.0, 17.1, 3.0, 2.5, 3.8, 2.2, ChannelKind::quantum}, 28.6},
      {"quantum worst", {0.0, 27.7, 3.0, 7.9, 3.8, 2.2, ChannelKind::quantum}, 44.6},
      {"beacon best", {3.0, 22.5, 3.0, 0.17, 3.0, 0.0, ChannelKind::beacon}, 31.7},
      {"beacon worst", {3.0, 33.1, 3.0, 7.9, 3.0, 0.0, ChannelKind::beacon}, 50.0},
  };
  for (const auto& r : rows) {
    const double total = orbitlink::total_loss_db(r.budget);
    // Tabulated totals carry one decimal.
    v.check(std::round(total * 10.0) / 10.0 == r.expected,
            std::string(r.name) + " total " + fmt(total, 5) + " dB -> " + fmt(r.expected, 4) + " dB");
  }
  return v;
}

Verdict doppler() {
  Verdict v;
  const double s = orbitlink::doppler_relative_shift(10.0);
  const double n = orbitlink::doppler_relative_shift(-10.0);
  v.check(std::fabs(s - 3.34e-5) < 0.005e-5, "|v|/c at 10 km/s = " + fmt(s, 4));
  v.check(n == -s, "sign symmetric");
  v.check(std::fabs(s / 3e-5 - 1.0) <= 0.15, "within 15% of 3e-5 (ratio " + fmt(s / 3e-5) + ")");
  const auto pass = orbitlink::pass_profile(orbitlink::OrbitConfig{}, 1.0);
  double vmax = 0;
  for (const auto& p : pass) vmax = std::max(vmax, std::fabs(p.radial_velocity_km_s));
  v.info("500 km overhead pass: max |v_r| = " + fmt(vmax) + " km/s, shift " +
         fmt(orbitlink::doppler_relative_shift(vmax), 3));
  return v;
}

Verdict error_algebra() {
  Verdict v;
  const CounterRng rng{0xE2};
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto w = rng.words(Stream::trial, i);
    const double a = unit_from_words(w[0], w[1]);
    const double b = unit_from_words(w[2], w[3]);
    const double c = rng.uniform(Stream::trial, i, 1);
    using qbermodel::combine_error;
    worst = std::max({worst, std::fabs(combine_error(a, b) - combine_error(b, a)),
                      std::fabs(combine_error(combine_error(a, b), c) - combine_error(a, combine_error(b, c))),
                      std::fabs(combine_error(a, 0.0) - a), std::fabs(combine_error(0.5, a) - 0.5)});
  }
  v.check(worst <= 1e-12, "10^4 random triples: max deviation " + fmt(worst, 3) + " <= 1e-12");
  return v;
}

Verdict esnr_collapse() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto cfg = rn::preset_config("fig5");
  rn::RunOptions opt;
  opt.threads = rn::default_threads();
  const auto points = rn::run_sweep(cfg, opt);
  const double e_i = photonsim::detection_error(rn::sim_config(cfg));
  const double f = rn::get_path(cfg, "qber.noise_error_fraction").get<double>();
  std::size_t used = 0;
  std::size_t outliers = 0;
  for (const auto& p : points) {
    if (!p.mc || p.mc->sifted == 0) continue;
    ++used;
    const auto& m = *p.mc;
    const double model = qbermodel::qber_from_esnr(m.esnr, e_i, f);
    const double sigma = std::sqrt(model * (1.0 - model) / static_cast<double>(m.sifted));
    const double z = (m.qber - model) / sigma;
    const bool out = std::fabs(z) > 3.0;
    outliers += out;
    v.info(p.label + " " + p.series_path + "=" + (p.series_value.is_null() ? "-" : fmt(series(p))) + " " +
           p.axis_path + "=" + fmt(axis(p)) + ": esnr " + fmt(m.esnr) + " qber " + fmt(m.qber) + " model " +
           fmt(model) + " z " + fmt(z, 3) + (out ? "  <- outlier" : ""));
  }
  v.check(used >= 8, fmt(static_cast<double>(used)) + " configurations >= 8");
  v.check(outliers <= 1, fmt(static_cast<double>(outliers)) + " points beyond 3 sigma (<= 1 allowed)");
  const double t = seconds_since(t0);
  v.check(t <= 600.0, "runtime " + fmt(t, 3) + " s at " +
                          fmt(rn::get_path(cfg, "sim.n_pulses").get<double>(), 3) + " pulses/point");
  return v;
}

std::vector<rn::SweepPoint> loss_sweep(const char* preset) {
  rn::RunOptions opt;
  opt.threads = rn::default_threads();
  return rn::run_sweep(rn::preset_config(preset), opt);
}

Verdict fig2_shape() {
  Verdict v;
  const auto points = loss_sweep("fig2");
  std::vector<double> x, y, xa, ya;
  const rn::SweepPoint* last_positive = nullptr;
  for (const auto& p : points) {
    const double loss = axis(p);
    const double skr = p.mc->rate.skr_bps;
    v.info("channel loss " + fmt(loss) + " dB: MC skr " + fmt(skr) + " bps qber " + fmt(p.mc->qber) +
           " | model skr " + fmt(p.analytic_skr_bps) + " qber " + fmt(p.analytic.qber));
    if (skr > 0.0) last_positive = &p;
    if (loss <= 25.0 && skr > 0.0) {
      x.push_back(loss / 10.0);
      y.push_back(std::log10(skr));
    }
    if (loss <= 25.0 && p.analytic_skr_bps > 0.0) {
      xa.push_back(loss / 10.0);
      ya.push_back(std::log10(p.analytic_skr_bps));
    }
  }
  const double s = x.size() >= 2 ? slope(x, y) : std::nan("");
  v.check(std::fabs(s + 1.0) <= 0.15, "log-log slope for loss <= 25 dB = " + fmt(s) + " (-1 +- 0.15)");
  v.info("model slope " + fmt(xa.size() >= 2 ? slope(xa, ya) : std::nan("")));
  bool positive_37 = true;
  for (const auto& p : points)
    if (axis(p) >= 37.0) positive_37 = positive_37 && p.mc->rate.skr_bps > 0.0;
  const double total_37 = 37.0 + rn::total_signal_loss_db(rn::preset_config("fig2")) -
                          rn::get_path(rn::preset_config("fig2"), "signal.channel_loss_db").get<double>();
  v.check(positive_37, "SKR positive at every channel loss >= 37 dB (total " + fmt(total_37) + " dB)");
  if (last_positive) {
    const double q = last_positive->mc->qber;
    v.check(q >= 3.0 * 0.015, "QBER at last positive point (" + fmt(axis(*last_positive)) + " dB) = " + fmt(q) +
                                  " >= 0.045");
  } else {
    v.check(false, "no positive-rate point");
  }
  return v;
}

Verdict fig3_knees() {
  Verdict v;
  rn::RunOptions opt;
  opt.monte_carlo = false;
  const auto cfg = rn::preset_config("fig3");
  const auto points = rn::run_sweep(cfg, opt);
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> curves;
  for (const auto& p : points) {
    curves[series(p)].first.push_back(axis(p));
    curves[series(p)].second.push_back(p.analytic_skr_bps);
  }
  const std::map<double, double> measured{{10.0, 1000e3}, {16.0, 200e3}, {25.0, 30e3}};
  std::vector<double> knees;
  for (const auto& [loss, xy] : curves) {
    const double plateau = xy.second.front();
    const double knee = crossing_below(xy.first, xy.second, 0.5 * plateau);
    knees.push_back(knee);
    v.info(fmt(loss) + " dB: plateau " + fmt(plateau) + " bps, half-plateau noise " + fmt(knee) + " Hz (measured " +
           fmt(measured.at(loss)) + ")");
  }
  bool decreasing = knees.size() == 3;
  bool separated = knees.size() == 3;
  for (std::size_t i = 1; i < knees.size(); ++i) {
    decreasing = decreasing && knees[i] < knees[i - 1];
    separated = separated && knees[i - 1] >= 3.0 * knees[i];
  }
  v.check(decreasing, "knee noise strictly decreasing in loss");
  v.check(separated, "adjacent knees separated by >= 3x");
  std::size_t i = 0;
  for (const auto& [loss, target] : measured) {
    const double k = i < knees.size() ? knees[i] : std::nan("");
    v.check(k >= target / 3.0 && k <= target * 3.0,
            fmt(loss) + " dB knee " + fmt(k) + " Hz within x3 of " + fmt(target) + " Hz");
    ++i;
  }
  return v;
}

Verdict fig4_gate() {
  Verdict v;
  rn::RunOptions opt;
  opt.monte_carlo = false;
  const auto points = rn::run_sweep(rn::preset_config("fig4"), opt);
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> curves;
  for (const auto& p : points) {
    curves[series(p)].first.push_back(axis(p));
    curves[series(p)].second.push_back(p.analytic_skr_norm);
  }
  std::map<double, double> argmax;
  for (const auto& [loss, xy] : curves) {
    const auto& y = xy.second;
    const auto it = std::max_element(y.begin(), y.end());
    const bool any = *it > 0.0;
    argmax[loss] = any ? xy.first[static_cast<std::size_t>(it - y.begin())] : std::nan("");
    v.check(any && unimodal(y), fmt(loss) + " dB: NSKR unimodal in gate width, peak at " + fmt(argmax[loss]) + " ns");
  }
  v.check(argmax[37.0] < argmax[20.0] && argmax[20.0] < argmax[10.0],
          "argmax(37) < argmax(20) < argmax(10): " + fmt(argmax[37.0]) + " < " + fmt(argmax[20.0]) + " < " +
              fmt(argmax[10.0]) + " ns");
  v.check(argmax[37.0] >= 0.25 && argmax[37.0] <= 1.1, "argmax(37 dB) = " + fmt(argmax[37.0]) + " ns in [0.25, 1.1]");
  v.check(argmax[10.0] >= 1.6 && argmax[10.0] <= 6.6, "argmax(10 dB) = " + fmt(argmax[10.0]) + " ns in [1.6, 6.6]");
  v.info("argmax(30 dB) = " + fmt(argmax[30.0]) + " ns");
  return v;
}

Verdict table3_projection() {
  Verdict v;
  using distill::GainKind;
  const double g_rate = distill::gain_db(25e6, 400e6, GainKind::rate);
  const double g_mu = distill::gain_db(0.1, 0.3744, GainKind::mu);
  const double g_loss = distill::gain_db(7.4, 3.8, GainKind::loss);
  v.check(std::fabs(g_rate - 12.04) < 0.005, "rate gain " + fmt(g_rate) + " dB = 12.04");
  v.check(std::fabs(g_mu - 5.73) < 0.005, "mu gain " + fmt(g_mu) + " dB = 5.73");
  v.check(std::fabs(g_loss - 3.6) < 0.005, "loss gain " + fmt(g_loss) + " dB = 3.6");

  const auto cfg = rn::preset_config("fig6");
  const auto points = loss_sweep("fig6");
  std::vector<distill::CurvePoint> curve;
  for (const auto& p : points) curve.push_back({axis(p), p.mc->rate.skr_bps});
  const double right = rn::get_path(cfg, "projection.shift_right_db").get<double>();
  const double up = rn::get_path(cfg, "projection.shift_up_db").get<double>();
  const double cut = distill::cutoff_loss_db(curve);
  const double cut_p = distill::cutoff_loss_db(distill::mission_projection(curve, right, up));
  v.check(std::fabs(cut - 37.7) <= 1.0, "measured zero-rate cutoff " + fmt(cut) + " dB (37.7 +- 1)");
  v.check(std::fabs(cut_p - 47.0) <= 1.0, "projected cutoff " + fmt(cut_p) + " dB (47 +- 1)");
  v.info("shift applied: +" + fmt(right) + " dB right, +" + fmt(up) + " dB up");
  return v;
}

Verdict cascade_trials() {
  Verdict v;
  const std::size_t n = 10000;
  const int trials = 1000;
  for (double e : {0.01, 0.02, 0.05}) {
    std::size_t flagged = 0;
    std::size_t wrong = 0;
    double leak = 0.0;
    for (int t = 0; t < trials; ++t) {
      const CounterRng rng = CounterRng{0xCA5CADE}.derive(static_cast<std::uint64_t>(t) * 131 +
                                                          static_cast<std::uint64_t>(e * 1000));
      BitVector a(n);
      BitVector b(n);
      std::vector<std::uint32_t> w(4 * n);
      rng.fill(Stream::trial, 0, 0, w);
      for (std::size_t i = 0; i < n; ++i) {
        const bool bit = w[4 * i] & 1u;
        a.set(i, bit);
        b.set(i, bit != (unit_from_words(w[4 * i + 1], w[4 * i + 2]) < e));
      }
      distill::CascadeConfig cc;
      cc.seed = rng.seed();
      const auto r = distill::cascade_reconcile(a, b, e, cc);
      if (r.failed) {
        ++flagged;
        continue;
      }
      wrong += !(r.corrected == a);
      leak += static_cast<double>(r.leakage_bits);
    }
    const std::size_t ok = static_cast<std::size_t>(trials) - flagged;
    const double mean = ok ? leak / static_cast<double>(ok) : std::nan("");
    const double bound = 1.25 * distill::binary_entropy(e) * static_cast<double>(n);
    v.check(wrong == 0, "e=" + fmt(e) + ": " + fmt(static_cast<double>(ok)) + " unflagged trials, " +
                            fmt(static_cast<double>(wrong)) + " wrong keys (" + fmt(static_cast<double>(flagged)) +
                            " flagged)");
    v.check(mean <= bound, "e=" + fmt(e) + ": mean leakage " + fmt(mean, 5) + " <= " + fmt(bound, 5) +
                               " (ratio to H2(e) n: " + fmt(mean / (bound / 1.25)) + ")");
  }
  return v;
}

Verdict hdbc() {
  Verdict v;
  const hdbcsync::HdbcConfig cfg;
  const hdbcsync::DeBruijnIndex idx{16};
  std::size_t good = 0;
  std::vector<hdbcsync::BeaconSymbol> w(16);
  for (std::uint32_t i = 0; i < idx.length(); ++i) {
    for (std::size_t j = 0; j < 16; ++j)
      w[j] = idx.bit(i + j) ? hdbcsync::BeaconSymbol::one : hdbcsync::BeaconSymbol::zero;
    const auto r = hdbcsync::decode_index(w, idx);
    good += r.status == hdbcsync::IndexStatus::ok && r.index == i;
  }
  v.check(good == idx.length(), "exhaustive k=16 round trip: " + fmt(static_cast<double>(good), 6) + "/65536");

  // Pulse-level trials: 4k periods of received beacon with 30% erasure.
  const int trials = 1000;
  const std::size_t periods = 4 * 16;
  int recovered = 0;
  for (int t = 0; t < trials; ++t) {
    const CounterRng rng = CounterRng{0xBEAC}.derive(static_cast<std::uint64_t>(t));
    const std::uint64_t start = rng.words(Stream::trial, 0)[0] & 0xffffu;
    std::vector<std::uint8_t> bits(periods);
    for (std::size_t j = 0; j < periods; ++j) bits[j] = idx.bit(start + j);
    const auto tx = hdbcsync::encode_beacon(bits, cfg);
    hdbcsync::BeaconChannel ch;
    ch.erasure_probability = 0.3;
    const auto rx = hdbcsync::receive_beacon(tx, ch, rng);
    const auto obs = hdbcsync::observe_window(rx.timestamp_ps, cfg);
    if (rx.empty()) continue;
    // Symbols start at the period of the first surviving pulse.
    std::uint64_t first_period = 0;
    for (std::size_t j = 0; j < periods; ++j)
      if (tx[j] == rx.timestamp_ps[0]) first_period = j;
    const auto r = hdbcsync::decode_index(obs.symbols, idx);
    recovered += r.status == hdbcsync::IndexStatus::ok && r.index == ((start + first_period) & 0xffffu);
  }
  const double rate = static_cast<double>(recovered) / trials;
  v.check(rate >= 0.99, "index recovery at 30% erasure over 4k periods: " + fmt(100.0 * rate) + "% of " +
                            fmt(trials) + " trials");

  // End to end: drift 3.3e-5 plus 50 ps jitter over 1 s of beacon.
  const auto tx = hdbcsync::beacon_transmit_times(100000, idx, cfg);
  hdbcsync::BeaconChannel ch;
  ch.erasure_probability = 0.1;
  ch.distortion = {3.3e-5, 1e9, 50.0};
  const auto rx = hdbcsync::receive_beacon(tx, ch, CounterRng{2718});
  const auto report = hdbcsync::align_beacon(rx.timestamp_ps, idx, cfg, 64);
  const auto model = hdbcsync::recover_clock(report.pairs);
  std::vector<double> rx_t(report.pairs.size());
  for (std::size_t i = 0; i < rx_t.size(); ++i) rx_t[i] = report.pairs[i].rx_ps;
  const auto corrected = hdbcsync::correct_timestamps(model, rx_t);
  double sq = 0.0;
  for (std::size_t i = 0; i < rx_t.size(); ++i) {
    const double d = corrected[i] - report.pairs[i].tx_ps;
    sq += d * d;
  }
  const double rms = std::sqrt(sq / static_cast<double>(rx_t.size()));
  v.info(fmt(static_cast<double>(report.windows_decoded)) + "/" + fmt(static_cast<double>(report.windows)) +
         " windows decoded, " + fmt(static_cast<double>(report.pairs.size())) + " pairs, drift " +
         fmt(model.drift, 6) + ", offset " + fmt(model.offset_ps, 10) + " ps");
  v.check(rms < 100.0, "corrected-timestamp residual RMS " + fmt(rms) + " ps < 100 ps");
  return v;
}

Verdict decoy() {
  Verdict v;
  double worst = 0.0;
  bool below = true;
  for (double eta = 1e-6; eta <= 0.1 + 1e-12; eta *= std::sqrt(10.0)) {
    distill::DecoyObservation o;
    o.mu_signal = 0.5;
    o.mu_decoy = 0.08;
    auto gain = [eta](double mu) { return 1.0 - std::exp(-mu * eta); };
    o.gain_signal = gain(0.5);
    o.gain_decoy = gain(0.08);
    o.gain_vacuum = 0.0;
    o.qber_signal = o.qber_decoy = 0.0;
    const auto e = distill::decoy_bounds(o);
    below = below && e.y1_lower <= eta * (1.0 + 1e-9);
    worst = std::max(worst, (eta - e.y1_lower) / eta);
  }
  v.check(below && worst <= 0.02, "Y1 lower bound at most " + fmt(100.0 * worst, 3) + "% below truth for eta <= 0.1 (<= 2%)");

  rn::RunOptions opt;
  opt.monte_carlo = false;
  const auto points = rn::run_sweep(rn::preset_config("fig2"), opt);
  bool exceeds = true;
  for (const auto& p : points) {
    if (axis(p) < 20.0) continue;
    const bool ok = p.analytic_decoy_rate > p.analytic.secure_rate;
    exceeds = exceeds && ok;
    v.info(fmt(axis(p)) + " dB: decoy " + fmt(p.analytic_decoy_rate) + " vs single " + fmt(p.analytic.secure_rate) +
           " per pulse" + (ok ? "" : "  <- not exceeding"));
  }
  v.check(exceeds, "decoy rate exceeds the mu=0.1 single-intensity rate at every loss >= 20 dB");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  const unsigned many = std::max(4u, rn::default_threads());
  const fs::path root = fs::temp_directory_path() / "qkdbench_acceptance_determinism";
  fs::remove_all(root);
  for (const auto& name : rn::preset_names()) {
    auto cfg = rn::preset_config(name);
    rn::set_path(cfg, "sim.n_pulses", 200000);
    rn::set_path(cfg, "sim.dump_events", true);
    std::vector<std::vector<fs::path>> runs;
    for (unsigned threads : {1u, 1u, many}) {
      rn::RunOptions opt;
      opt.threads = threads;
      runs.push_back(rn::run_preset(cfg, root / (name + "_" + std::to_string(runs.size())), opt));
    }
    bool same = true;
    std::size_t files = runs[0].size();
    for (std::size_t r = 1; r < runs.size(); ++r) {
      same = same && runs[r].size() == files;
      for (std::size_t i = 0; same && i < files; ++i)
        same = runs[r][i].filename() == runs[0][i].filename() && slurp(runs[r][i]) == slurp(runs[0][i]);
    }
    v.check(same, name + ": " + fmt(static_cast<double>(files)) + " files byte-identical across 2 runs at 1 thread and 1 at " +
                      fmt(many) + " threads");
  }
  fs::remove_all(root);
  return v;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "geometry anchors", geometry_anchors},
      {2, "link budget totals", table1_totals},
      {3, "doppler shift", doppler},
      {4, "error composition algebra", error_algebra},
      {5, "ESNR collapse", esnr_collapse},
      {6, "SKR vs channel loss shape", fig2_shape},
      {7, "noise knees", fig3_knees},
      {8, "gate-width optimum", fig4_gate},
      {9, "parameter gains and mission projection", table3_projection},
      {10, "cascade correctness and leakage", cascade_trials},
      {11, "beacon index and clock recovery", hdbc},
      {12, "decoy bounds and rate", decoy},
      {13, "determinism", determinism},
  };

  CLI::App app{"qkdbench acceptance suite"};
  std::vector<int> selected;
  bool verbose = false;
  app.add_option("--criterion", selected, "Criterion number(s) to run (default: all)")->check(CLI::Range(1, 13));
  app.add_flag("-v,--verbose", verbose, "Print measured values for every criterion");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " ("
              << fmt(seconds_since(t0), 3) << " s)\n";
    for (const auto& n : v.notes)
      if (verbose || !v.pass || n.rfind("FAIL", 0) == 0 || n.rfind("ok", 0) == 0) std::cout << "      " << n << '\n';
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
