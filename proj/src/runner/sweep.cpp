#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <thread>

#include "qkdbench/cascade.hpp"
#include "qkdbench/runner.hpp"

namespace qkdbench::runner {

namespace {

double num(const Json& cfg, const char* path) { return get_path(cfg, path).get<double>(); }

double binomial_se(double p, double n) { return n > 0.0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / n) : 0.0; }

double transmittance(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

struct PointPlan {
  std::size_t sweep = 0;
  Json series_value;
  Json axis_value;
  Json config;
};

std::vector<PointPlan> plan_points(const Json& cfg, const std::vector<SweepSpec>& specs) {
  std::vector<PointPlan> plan;
  if (specs.empty()) {
    plan.push_back({0, Json(), Json(), cfg});
    return plan;
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::vector<Json> series = s.series_values.empty() ? std::vector<Json>{Json()} : s.series_values;
    for (const auto& sv : series) {
      for (const auto& av : s.axis_values) {
        Json c = cfg;
        if (!s.series_path.empty()) set_path(c, s.series_path, sv);
        set_path(c, s.axis_path, av);
        plan.push_back({i, sv, av, std::move(c)});
      }
    }
  }
  return plan;
}

// Everything that influences the detection log, i.e. the config minus the
// gate width, which only enters at gating time.
std::string simulation_key(const Json& cfg) {
  Json c = cfg;
  c["signal"]["gate_width_ns"] = nullptr;
  c["sweeps"] = nullptr;
  c["figure"] = nullptr;
  return c.dump();
}

MonteCarloResult evaluate(const Json& cfg, const photonsim::SimConfig& sim, const photonsim::SimulationResult& run,
                          const distill::MatchResult& matched, double gate_width_ns) {
  const photonsim::TxSource tx{sim};
  const distill::SiftedBlock block = distill::sift(matched, tx, run.pulses_per_class, 0);
  const auto& key = block.classes.at(0);

  MonteCarloResult r;
  r.pulses = sim.n_pulses;
  for (const auto& c : block.classes) r.clicks += c.clicks;
  r.sifted = key.sifted;
  r.errors = key.errors;
  r.signal = block.gated_signal_clicks;
  r.noise = block.gated_noise_clicks;
  r.gain = key.gain();
  r.gain_se = binomial_se(r.gain, static_cast<double>(key.pulses));
  r.qber = key.qber();
  r.qber_se = binomial_se(r.qber, static_cast<double>(key.sifted));
  r.esnr = r.noise > 0 ? static_cast<double>(r.signal) / static_cast<double>(r.noise)
                       : std::numeric_limits<double>::infinity();

  const auto in = analytic_inputs(cfg);
  const double n = static_cast<double>(sim.n_pulses);
  const double sifted_rate = static_cast<double>(key.sifted) / n;
  double secure = 0.0;
  const auto sched = photonsim::schedule(sim);
  if (sched.size() == 3) {
    r.decoy = true;
    distill::DecoyObservation obs;
    obs.mu_signal = sched[0].mu;
    obs.mu_decoy = sched[1].mu;
    obs.gain_signal = block.classes[0].gain();
    obs.qber_signal = block.classes[0].qber();
    obs.gain_decoy = block.classes[1].gain();
    obs.qber_decoy = block.classes[1].qber();
    obs.gain_vacuum = block.classes[2].gain();
    obs.qber_vacuum = block.classes[2].sifted ? block.classes[2].qber() : in.noise_error_fraction;
    const auto est = distill::decoy_bounds(obs);
    secure = static_cast<double>(key.pulses) / n *
             distill::decoy_rate(obs, est, distill::basis_match_probability(sim.basis_bias_px), in.f_ec);
  } else if (key.clicks > 0) {
    const double capture =
        qbermodel::gate_capture_fraction(sim.pulse_fwhm_ns, gate_width_ns, sim.timing_sigma_ns);
    const double p_multi =
        distill::multiphoton_probability(in.multiphoton, sim.mu, transmittance(sim.total_loss_db), capture);
    secure = distill::gllp_rate_single(static_cast<double>(key.sifted) / static_cast<double>(key.clicks), r.gain,
                                       r.qber, p_multi, in.f_ec);
  }

  double leakage = 0.0;
  if (get_path(cfg, "distill.cascade").get<bool>() && !block.empty) {
    distill::CascadeConfig cc;
    cc.passes = static_cast<int>(get_path(cfg, "distill.cascade_passes").get<std::int64_t>());
    cc.max_passes = std::max(cc.passes, 10);
    cc.seed = sim.seed;
    const auto res = distill::cascade_reconcile(BitVector::from_bits(block.alice_bits),
                                                BitVector::from_bits(block.bob_bits),
                                                std::max(block.measured_qber, 1e-3), cc);
    r.cascade_failed = res.failed;
    leakage = static_cast<double>(res.leakage_bits);
  }
  r.rate = distill::make_key_rate(static_cast<double>(r.clicks) / n, sifted_rate, secure, sim.rep_rate_hz, leakage);
  return r;
}

}  // namespace

unsigned default_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QKDBENCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) hw = std::min(hw, static_cast<unsigned>(v));
  }
  return hw;
}

std::vector<MonteCarloResult> run_monte_carlo(const Json& cfg, const std::vector<double>& gate_widths_ns,
                                              unsigned threads) {
  const photonsim::SimConfig sim = sim_config(cfg);
  const photonsim::SimulationResult run = photonsim::simulate_channel(sim, threads);
  const double period = photonsim::period_ps(sim);

  hdbcsync::ClockModel clock;
  std::size_t pairs = 0;
  photonsim::DetectionLog received = run.detections;
  if (get_path(cfg, "hdbc.enabled").get<bool>()) {
    const auto h = hdbc_config(cfg);
    const hdbcsync::DeBruijnIndex index{h.order_k};
    const double duration = static_cast<double>(sim.n_pulses) * period;
    const auto n_periods = static_cast<std::uint64_t>(std::ceil(duration / hdbcsync::beacon_period_ps(h))) + 1;
    const auto tx = hdbcsync::beacon_transmit_times(n_periods, index, h);
    hdbcsync::BeaconChannel channel;
    channel.erasure_probability = num(cfg, "hdbc.erasure_probability");
    channel.distortion = {num(cfg, "hdbc.drift"), num(cfg, "hdbc.offset_ps"), num(cfg, "hdbc.jitter_ps")};
    const CounterRng rng{sim.seed};
    const auto rx = hdbcsync::receive_beacon(tx, channel, rng);
    const auto report = hdbcsync::align_beacon(
        rx.timestamp_ps, index, h, static_cast<std::size_t>(get_path(cfg, "hdbc.window_periods").get<std::int64_t>()));
    if (report.pairs.size() < 2) throw std::runtime_error("beacon synchronisation failed: no decodable window");
    clock = hdbcsync::recover_clock(report.pairs);
    pairs = report.pairs.size();
    // Same clock error on the quantum channel; timing jitter is already in the pulse model.
    received = photonsim::apply_clock_distortion(run.detections, {channel.distortion.drift, channel.distortion.offset_ps, 0.0},
                                                 rng);
  }

  std::vector<MonteCarloResult> out;
  for (double g : gate_widths_ns) {
    const auto matched = distill::gate_and_match(received, clock, period, g, sim.n_pulses);
    MonteCarloResult r = evaluate(cfg, sim, run, matched, g);
    r.sync_pairs = pairs;
    r.clock_residual_ps = clock.residual_rms_ps;
    r.clock_drift = clock.drift;
    out.push_back(r);
  }
  return out;
}

std::vector<SweepPoint> run_sweep(const Json& cfg, const RunOptions& options) {
  const auto specs = sweep_specs(cfg);
  const auto plan = plan_points(cfg, specs);
  const bool mc = options.monte_carlo && get_path(cfg, "sim.enabled").get<bool>();

  std::vector<SweepPoint> points(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    SweepPoint& p = points[i];
    const PointPlan& pl = plan[i];
    if (!specs.empty()) {
      const auto& s = specs[pl.sweep];
      p.label = s.label;
      p.series_path = s.series_path;
      p.axis_path = s.axis_path;
    } else {
      p.label = "single";
    }
    p.series_value = pl.series_value;
    p.axis_value = pl.axis_value;
    p.config = pl.config;
    try {
      const auto in = analytic_inputs(p.config);
      p.analytic = distill::analytic_single(in);
      p.analytic_skr_bps = p.analytic.secure_rate * in.signal.rep_rate_hz;
      auto din = in;
      din.basis_bias_px = num(p.config, "distill.decoy.basis_bias_px");
      p.analytic_decoy_rate = distill::analytic_decoy_rate(din, num(p.config, "distill.decoy.mu_signal"),
                                                           num(p.config, "distill.decoy.mu_decoy"),
                                                           num(p.config, "distill.decoy.p_signal"));
      p.analytic_decoy_skr_bps = p.analytic_decoy_rate * in.signal.rep_rate_hz;
    } catch (const std::exception& e) {
      p.status = std::string{"error: "} + e.what();
    }
  }

  if (mc) {
    std::map<std::string, std::vector<std::size_t>> by_key;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].status != "ok") continue;
      auto key = simulation_key(points[i].config);
      auto [it, inserted] = by_key.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(i);
    }
    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(order.size())));
    const unsigned inner = std::max(1u, options.threads / std::max<unsigned>(1, static_cast<unsigned>(order.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t g; (g = next.fetch_add(1)) < order.size();) {
        const auto& idx = by_key.at(order[g]);
        std::vector<double> gates;
        for (auto i : idx) gates.push_back(num(points[i].config, "signal.gate_width_ns"));
        try {
          const auto results = run_monte_carlo(points[idx.front()].config, gates, inner);
          for (std::size_t j = 0; j < idx.size(); ++j) points[idx[j]].mc = results[j];
        } catch (const std::exception& e) {
          for (auto i : idx) points[i].status = std::string{"error: "} + e.what();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    }
  }

  // Rates normalised to the peak of their series.
  std::map<std::string, std::pair<double, double>> peak;
  auto series_key = [](const SweepPoint& p) { return p.label + "\x1f" + p.series_value.dump(); };
  for (const auto& p : points) {
    auto& pk = peak[series_key(p)];
    pk.first = std::max(pk.first, p.analytic.secure_rate);
    if (p.mc) pk.second = std::max(pk.second, p.mc->rate.secure_rate_per_pulse);
  }
  for (auto& p : points) {
    const auto& pk = peak[series_key(p)];
    p.analytic_skr_norm = pk.first > 0.0 ? p.analytic.secure_rate / pk.first : 0.0;
    if (p.mc) p.mc_skr_norm = pk.second > 0.0 ? p.mc->rate.secure_rate_per_pulse / pk.second : 0.0;
  }
  return points;
}

}  // namespace qkdbench::runner
