#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qkdbench/runner.hpp"

namespace qkdbench::runner {

namespace fs = std::filesystem;

namespace {

std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_file(const fs::path& path, const std::string& content, std::vector<fs::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
  written.push_back(path);
}

template <typename F>
std::string to_text(F&& f) {
  std::ostringstream ss;
  f(ss);
  return ss.str();
}

std::string series_list(const Json& cfg) {
  std::string out;
  for (const auto& s : get_path(cfg, "sweeps")) {
    if (!s.contains("series")) continue;
    for (const auto& v : s["series"]["values"]) out += (out.empty() ? "" : " ") + cell(v);
    break;
  }
  return out;
}

const char* kSweepColumns[] = {
    "label", "series_path", "series", "axis_path", "axis", "status",
    "S", "N", "esnr", "sifted_count", "errors", "qber", "qber_se", "gain", "gain_se",
    "skr_per_pulse", "skr_bps", "nskr", "skr_norm", "leakage_bits", "sync_pairs", "clock_residual_ps",
    "an_S", "an_N", "an_esnr", "an_gain", "an_qber", "an_sifted_rate", "an_skr_per_pulse", "an_skr_bps",
    "an_nskr", "an_skr_norm", "an_decoy_skr_per_pulse", "an_decoy_skr_bps"};

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  bool first = true;
  for (const char* c : kSweepColumns) {
    out << (first ? "" : ",") << c;
    first = false;
  }
  out << '\n';
  for (const auto& p : points) {
    std::vector<std::string> row{p.label, p.series_path, cell(p.series_value), p.axis_path, cell(p.axis_value)};
    std::string status = p.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    row.push_back(status);
    if (p.mc) {
      const auto& m = *p.mc;
      for (double v : {static_cast<double>(m.signal), static_cast<double>(m.noise), m.esnr,
                       static_cast<double>(m.sifted), static_cast<double>(m.errors), m.qber, m.qber_se, m.gain,
                       m.gain_se, m.rate.secure_rate_per_pulse, m.rate.skr_bps, m.rate.nskr, p.mc_skr_norm,
                       m.rate.leakage_bits, static_cast<double>(m.sync_pairs), m.clock_residual_ps})
        row.push_back(format_number(v));
    } else {
      row.insert(row.end(), 16, "");
    }
    const auto& a = p.analytic;
    for (double v : {a.s_gate, a.n_gate, a.esnr, a.gain, a.qber, a.sifted_rate, a.secure_rate, p.analytic_skr_bps,
                     a.nskr, p.analytic_skr_norm, p.analytic_decoy_rate, p.analytic_decoy_skr_bps})
      row.push_back(format_number(v));
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_pass_csv(std::ostream& out, const Json& cfg) {
  const auto orbit = orbit_config(cfg);
  const auto q = link_terms(cfg, orbitlink::ChannelKind::quantum);
  const auto b = link_terms(cfg, orbitlink::ChannelKind::beacon);
  out << "t_s,elevation_deg,slant_range_km,radial_velocity_km_s,quantum_loss_db,beacon_loss_db\n";
  for (const auto& s : orbitlink::pass_profile(orbit, get_path(cfg, "orbit.timestep_s").get<double>())) {
    const double ql = orbitlink::total_loss_db(orbitlink::budget_at(q, s.elevation_deg, orbit));
    const double bl = orbitlink::total_loss_db(orbitlink::budget_at(b, s.elevation_deg, orbit));
    out << format_number(s.t_s) << ',' << format_number(s.elevation_deg) << ',' << format_number(s.slant_range_km)
        << ',' << format_number(s.radial_velocity_km_s) << ',' << format_number(ql) << ',' << format_number(bl)
        << '\n';
  }
}

void write_table3_csv(std::ostream& out, const Json& cfg) {
  const Json& t = get_path(cfg, "table3");
  auto pair = [&](const char* key) {
    const Json& v = t.at(key);
    return std::make_pair(v.at(0).get<double>(), v.at(1).get<double>());
  };
  const auto [r0, r1] = pair("rep_rate_hz");
  const auto [m0, m1] = pair("mu");
  const auto [l0, l1] = pair("system_loss_db");
  const double g_rate = distill::gain_db(r0, r1, distill::GainKind::rate);
  const double g_mu = distill::gain_db(m0, m1, distill::GainKind::mu);
  const double g_loss = distill::gain_db(l0, l1, distill::GainKind::loss);
  out << "parameter,old,new,kind,gain_db\n";
  out << "rep_rate_hz," << format_number(r0) << ',' << format_number(r1) << ",rate," << format_number(g_rate) << '\n';
  out << "mu," << format_number(m0) << ',' << format_number(m1) << ",mu," << format_number(g_mu) << '\n';
  out << "system_loss_db," << format_number(l0) << ',' << format_number(l1) << ",loss," << format_number(g_loss)
      << '\n';
  out << "horizontal_shift_db,,,loss+mu," << format_number(g_loss + g_mu) << '\n';
  out << "vertical_shift_db,,,rate," << format_number(g_rate) << '\n';
}

void write_projection_csv(std::ostream& out, const Json& cfg, const std::vector<SweepPoint>& points) {
  const double right = get_path(cfg, "projection.shift_right_db").get<double>();
  const double up = get_path(cfg, "projection.shift_up_db").get<double>();
  std::vector<distill::CurvePoint> an;
  std::vector<distill::CurvePoint> mc;
  std::vector<const SweepPoint*> used;
  for (const auto& p : points) {
    if (p.axis_path != "signal.channel_loss_db" || !p.axis_value.is_number()) continue;
    const double loss = p.axis_value.get<double>();
    an.push_back({loss, p.analytic_skr_bps});
    mc.push_back({loss, p.mc ? p.mc->rate.skr_bps : std::nan("")});
    used.push_back(&p);
  }
  const auto an_p = distill::mission_projection(an, right, up);
  const auto mc_p = distill::mission_projection(mc, right, up);
  out << "channel_loss_db,an_skr_bps,mc_skr_bps,projected_loss_db,projected_an_skr_bps,projected_mc_skr_bps\n";
  for (std::size_t i = 0; i < an.size(); ++i) {
    out << format_number(an[i].loss_db) << ',' << format_number(an[i].skr) << ','
        << (used[i]->mc ? format_number(mc[i].skr) : "") << ',' << format_number(an_p[i].loss_db) << ','
        << format_number(an_p[i].skr) << ',' << (used[i]->mc ? format_number(mc_p[i].skr) : "") << '\n';
  }
}

Json point_summary(const SweepPoint& p) {
  Json j;
  j["config"] = p.config;
  if (p.mc) {
    const auto& m = *p.mc;
    j["sifted_count"] = m.sifted;
    j["qber"] = m.qber;
    j["esnr"] = finite_or_null(m.esnr);
    j["skr_per_pulse"] = m.rate.secure_rate_per_pulse;
    j["skr_bps"] = m.rate.skr_bps;
    j["nskr"] = m.rate.nskr;
    j["leakage_bits"] = m.rate.leakage_bits;
  } else {
    j["sifted_count"] = nullptr;
    j["qber"] = p.analytic.qber;
    j["esnr"] = finite_or_null(p.analytic.esnr);
    j["skr_per_pulse"] = p.analytic.secure_rate;
    j["skr_bps"] = p.analytic_skr_bps;
    j["nskr"] = p.analytic.nskr;
    j["leakage_bits"] = nullptr;
  }
  return j;
}

std::string gnuplot_script(const Json& cfg, const std::string& csv) {
  const std::string fig = get_path(cfg, "figure").get<std::string>();
  std::ostringstream g;
  g << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set terminal pngcairo size 900,600\n"
    << "set output '" << fig << ".png'\n"
    << "set grid\n";
  const std::string series = series_list(cfg);
  if (fig == "fig2" || fig == "fig6" || fig == "custom") {
    g << "set xlabel 'channel loss (dB)'\nset ylabel 'SKR (bit/s)'\nset logscale y\n"
      << "set y2label 'QBER'\nset y2tics\n"
      << "plot '" << csv << "' using 'axis':'an_skr_bps' with lines title 'SKR (model)', \\\n"
      << "     '' using 'axis':'skr_bps' with points title 'SKR (Monte Carlo)', \\\n";
    if (fig == "fig6")
      g << "     '' using 'axis':'an_decoy_skr_bps' with lines title 'SKR decoy (model)', \\\n"
        << "     'fig6_projection.csv' using 'projected_loss_db':'projected_an_skr_bps' with lines title 'projected', \\\n";
    g << "     '" << csv << "' using 'axis':'qber' axes x1y2 with points title 'QBER'\n";
  } else if (fig == "fig3") {
    g << "set xlabel 'noise count rate (Hz)'\nset ylabel 'SKR (bit/s)'\nset logscale xy\n"
      << "plot for [s in \"" << series << "\"] '" << csv
      << "' using 'axis':(strcol('series') eq s ? column('an_skr_bps') : NaN) with lines title s.' dB', \\\n"
      << "     for [s in \"" << series << "\"] '" << csv
      << "' using 'axis':(strcol('series') eq s ? column('skr_bps') : NaN) with points notitle\n";
  } else if (fig == "fig4") {
    g << "set xlabel 'gate width (ns)'\nset ylabel 'SKR / peak SKR'\n"
      << "plot for [s in \"" << series << "\"] '" << csv
      << "' using 'axis':(strcol('series') eq s ? column('an_skr_norm') : NaN) with lines title s.' dB', \\\n"
      << "     for [s in \"" << series << "\"] '" << csv
      << "' using 'axis':(strcol('series') eq s ? column('skr_norm') : NaN) with points notitle\n";
  } else if (fig == "fig5") {
    const double e_sp = get_path(cfg, "qber.e_sp").get<double>();
    const double f = get_path(cfg, "qber.noise_error_fraction").get<double>();
    g << "set xlabel 'ESNR'\nset ylabel 'QBER'\nset logscale x\n"
      << "ei = " << format_number(e_sp) << "\nF(a,b) = a + b - 2*a*b\n"
      << "model(x) = F(ei, " << format_number(f) << "/(x+1))\n"
      << "plot '" << csv << "' using 'esnr':'qber':'qber_se' with yerrorbars title 'Monte Carlo', \\\n"
      << "     model(x) with lines title 'model'\n";
  } else if (fig == "fig7") {
    g << "set xlabel 't (s)'\nset ylabel 'elevation (deg)'\nset y2label 'slant range (km)'\nset y2tics\n"
      << "plot '" << csv << "' using 't_s':'elevation_deg' with lines, \\\n"
      << "     '' using 't_s':'slant_range_km' axes x1y2 with lines\n";
  } else {
    g << "plot '" << csv << "' using 0:5 with boxes\n";
  }
  return g.str();
}

std::vector<fs::path> dump_events(const Json& cfg, const fs::path& dir, unsigned threads) {
  std::vector<fs::path> written;
  const auto sim = sim_config(cfg);
  const auto run = photonsim::simulate_channel(sim, threads);
  write_file(dir / "events.csv", to_text([&](std::ostream& o) { photonsim::write_detections_csv(o, run.detections); }),
             written);
  write_file(dir / "tx.csv",
             to_text([&](std::ostream& o) { photonsim::write_tx_csv(o, photonsim::generate_tx_stream(sim)); }),
             written);
  if (get_path(cfg, "hdbc.enabled").get<bool>()) {
    const auto h = hdbc_config(cfg);
    const hdbcsync::DeBruijnIndex index{h.order_k};
    const double duration = static_cast<double>(sim.n_pulses) * photonsim::period_ps(sim);
    const auto n = static_cast<std::uint64_t>(std::ceil(duration / hdbcsync::beacon_period_ps(h))) + 1;
    hdbcsync::BeaconChannel ch;
    ch.erasure_probability = get_path(cfg, "hdbc.erasure_probability").get<double>();
    ch.distortion = {get_path(cfg, "hdbc.drift").get<double>(), get_path(cfg, "hdbc.offset_ps").get<double>(),
                     get_path(cfg, "hdbc.jitter_ps").get<double>()};
    const auto rx = hdbcsync::receive_beacon(hdbcsync::beacon_transmit_times(n, index, h), ch, CounterRng{sim.seed});
    write_file(dir / "beacon.csv", to_text([&](std::ostream& o) { photonsim::write_detections_csv(o, rx); }),
               written);
  }
  return written;
}

std::vector<fs::path> run_preset(const Json& cfg, const fs::path& dir, const RunOptions& options) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const std::string fig = get_path(cfg, "figure").get<std::string>();
  std::vector<fs::path> written;

  if (fig == "fig7") {
    write_file(dir / "fig7.csv", to_text([&](std::ostream& o) { write_pass_csv(o, cfg); }), written);
    write_file(dir / "fig7.gp", gnuplot_script(cfg, "fig7.csv"), written);
    return written;
  }
  if (fig == "table3") {
    write_file(dir / "table3.csv", to_text([&](std::ostream& o) { write_table3_csv(o, cfg); }), written);
    return written;
  }

  const auto points = run_sweep(cfg, options);
  const std::string csv = fig + ".csv";
  write_file(dir / csv, to_text([&](std::ostream& o) { write_sweep_csv(o, points); }), written);
  write_file(dir / (fig + ".gp"), gnuplot_script(cfg, csv), written);
  if (fig == "fig6")
    write_file(dir / "fig6_projection.csv", to_text([&](std::ostream& o) { write_projection_csv(o, cfg, points); }),
               written);

  fs::create_directories(dir / "runs", ec);
  if (ec) throw std::runtime_error("cannot create '" + (dir / "runs").string() + "': " + ec.message());
  Json index = Json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::ostringstream name;
    name << fig << '_' << std::setw(3) << std::setfill('0') << i << ".json";
    write_file(dir / "runs" / name.str(), point_summary(points[i]).dump(2) + "\n", written);
    index.push_back(Json{{"file", "runs/" + name.str()}, {"status", points[i].status}});
  }
  Json summary{{"config", cfg}, {"runs", index}};
  write_file(dir / "summary.json", summary.dump(2) + "\n", written);

  if (get_path(cfg, "sim.dump_events").get<bool>()) {
    const auto extra = dump_events(cfg, dir, options.threads);
    written.insert(written.end(), extra.begin(), extra.end());
  }
  return written;
}

}  // namespace qkdbench::runner
