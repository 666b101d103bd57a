#include <cmath>
#include <fstream>
#include <sstream>

#include "qkdbench/runner.hpp"

namespace qkdbench::runner {

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    parts.emplace_back(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    if (parts.back().empty()) throw ConfigError("malformed parameter path '" + std::string{path} + "'");
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

template <typename J>
J* walk(J& node, std::string_view path) {
  J* cur = &node;
  for (const auto& part : split_path(path)) {
    if (cur->is_object()) {
      auto it = cur->find(part);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array() && is_index(part)) {
      const std::size_t i = std::stoul(part);
      if (i >= cur->size()) return nullptr;
      cur = &(*cur)[i];
    } else {
      return nullptr;
    }
  }
  return cur;
}

void merge_into(Json& base, const Json& patch, const std::string& prefix) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    auto found = base.find(it.key());
    if (found == base.end()) throw ConfigError("unknown parameter '" + path + "'");
    if (found->is_object() && it->is_object())
      merge_into(*found, *it, path);
    else
      *found = *it;
  }
}

double num(const Json& cfg, const char* path) {
  const Json& v = get_path(cfg, path);
  if (!v.is_number()) throw ConfigError(std::string{"parameter '"} + path + "' must be a number");
  return v.get<double>();
}

std::uint64_t count(const Json& cfg, const char* path) {
  const Json& v = get_path(cfg, path);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(std::string{"parameter '"} + path + "' must be a nonnegative integer");
}

bool flag(const Json& cfg, const char* path) {
  const Json& v = get_path(cfg, path);
  if (!v.is_boolean()) throw ConfigError(std::string{"parameter '"} + path + "' must be true or false");
  return v.get<bool>();
}

std::string text(const Json& cfg, const char* path) {
  const Json& v = get_path(cfg, path);
  if (!v.is_string()) throw ConfigError(std::string{"parameter '"} + path + "' must be a string");
  return v.get<std::string>();
}

Json link_json(const orbitlink::LinkTerms& l) {
  return Json{{"wavelength_nm", l.beam.wavelength_nm},
              {"waist_radius_mm", l.beam.waist_radius_mm},
              {"m_squared", l.beam.m_squared},
              {"divergence_half_angle_urad", l.beam.divergence_half_angle_urad},
              {"divergence_is_full_angle", l.beam.divergence_is_full_angle},
              {"rx_diameter_m", l.rx_diameter_m},
              {"tx_internal_db", l.tx_internal_db},
              {"turbulence_pointing_db", l.turbulence_pointing_db},
              {"ogs_internal_db", l.ogs_internal_db},
              {"detector_efficiency_db", l.detector_efficiency_db}};
}

template <typename F>
void check(std::vector<std::string>& out, const std::string& where, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    out.push_back(where + ": " + e.what());
  }
}

}  // namespace

Json default_config() {
  Json c;
  c["figure"] = "custom";
  c["seed"] = 1;
  c["orbit"] = {{"altitude_km", 500.0}, {"earth_radius_km", 6371.0}, {"min_elevation_deg", 10.0}, {"timestep_s", 1.0}};
  c["quantum_link"] = link_json(orbitlink::spoqc_quantum_link());
  c["beacon_link"] = link_json(orbitlink::spoqc_beacon_link());
  c["signal"] = {{"mu", 0.1},
                 {"pulse_fwhm_ns", 0.9},
                 {"rep_rate_hz", 25e6},
                 {"channel_loss_db", 20.0},
                 {"system_loss_db", 7.4},
                 {"detector_loss_db", 2.2},
                 {"gate_width_ns", 1.0},
                 {"timing_sigma_ns", 0.015},
                 {"background_rate_hz", 400.0},
                 {"dark_count_rate_hz", 2300.0}};
  c["qber"] = {{"e_sp", 0.015}, {"e_pbs", 0.0}, {"e_a", 0.0}, {"noise_error_fraction", 0.5}};
  c["sim"] = {{"enabled", true},
              {"n_pulses", 10'000'000},
              {"basis_bias_px", 0.5},
              {"intensity_schedule", Json::array()},
              {"dead_time_ns", 0.0},
              {"block_pulses", 1 << 18},
              {"dump_events", false}};
  c["hdbc"] = {{"enabled", true},
               {"order_k", 16},
               {"beacon_rate_hz", 100e3},
               {"ppm_offset_fraction", 0.25},
               {"erasure_probability", 0.1},
               {"drift", 3.3e-5},
               {"offset_ps", 1e9},
               {"jitter_ps", 15.0},
               {"window_periods", 64}};
  c["distill"] = {{"f_ec", 1.2},
                  {"multiphoton_model", "passive"},
                  {"cascade", true},
                  {"cascade_passes", 4},
                  {"decoy",
                   {{"mu_signal", 0.5},
                    {"p_signal", 0.72},
                    {"mu_decoy", 0.08},
                    {"p_decoy", 0.18},
                    {"p_vacuum", 0.1},
                    {"basis_bias_px", 0.9}}}};
  c["projection"] = {{"shift_right_db", 9.3}, {"shift_up_db", 12.0}};
  c["table3"] = {{"rep_rate_hz", {25e6, 400e6}}, {"mu", {0.1, 0.3744}}, {"system_loss_db", {7.4, 3.8}}};
  c["sweeps"] = Json::array();
  return c;
}

Json parse_config_text(std::string_view text_in) {
  Json patch;
  try {
    patch = Json::parse(text_in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string{"config is not valid JSON: "} + e.what());
  }
  if (!patch.is_object()) throw ConfigError("config must be a JSON object");
  Json base = default_config();
  if (auto it = patch.find("preset"); it != patch.end()) {
    if (!it->is_string()) throw ConfigError("'preset' must be a string");
    base = preset_config(it->get<std::string>());
    patch.erase(it);
  }
  merge_into(base, patch, "");
  return base;
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

const Json& get_path(const Json& cfg, std::string_view path) {
  const Json* v = walk(cfg, path);
  if (!v) throw ConfigError("unknown parameter '" + std::string{path} + "'");
  return *v;
}

void set_path(Json& cfg, std::string_view path, const Json& value) {
  Json* v = walk(cfg, path);
  if (!v) throw ConfigError("unknown parameter '" + std::string{path} + "'");
  *v = value;
}

void apply_override(Json& cfg, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string{assignment} + "' is not of the form path=value");
  const std::string_view path = assignment.substr(0, eq);
  const std::string raw{assignment.substr(eq + 1)};
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  set_path(cfg, path, value);
}

orbitlink::OrbitConfig orbit_config(const Json& cfg) {
  orbitlink::OrbitConfig o;
  o.altitude_km = num(cfg, "orbit.altitude_km");
  o.earth_radius_km = num(cfg, "orbit.earth_radius_km");
  o.min_elevation_deg = num(cfg, "orbit.min_elevation_deg");
  return o;
}

orbitlink::LinkTerms link_terms(const Json& cfg, orbitlink::ChannelKind kind) {
  const bool q = kind == orbitlink::ChannelKind::quantum;
  const std::string base = q ? "quantum_link." : "beacon_link.";
  auto n = [&](const char* leaf) { return num(cfg, (base + leaf).c_str()); };
  orbitlink::LinkTerms l = q ? orbitlink::spoqc_quantum_link() : orbitlink::spoqc_beacon_link();
  l.beam.wavelength_nm = n("wavelength_nm");
  l.beam.waist_radius_mm = n("waist_radius_mm");
  l.beam.m_squared = n("m_squared");
  l.beam.divergence_half_angle_urad = n("divergence_half_angle_urad");
  l.beam.divergence_is_full_angle = flag(cfg, (base + "divergence_is_full_angle").c_str());
  l.rx_diameter_m = n("rx_diameter_m");
  l.tx_internal_db = n("tx_internal_db");
  l.turbulence_pointing_db = n("turbulence_pointing_db");
  l.ogs_internal_db = n("ogs_internal_db");
  l.detector_efficiency_db = n("detector_efficiency_db");
  return l;
}

double total_signal_loss_db(const Json& cfg) {
  return num(cfg, "signal.channel_loss_db") + num(cfg, "signal.system_loss_db") +
         num(cfg, "signal.detector_loss_db");
}

qbermodel::SignalModel signal_model(const Json& cfg) {
  qbermodel::SignalModel m;
  m.mu = num(cfg, "signal.mu");
  m.pulse_fwhm_ns = num(cfg, "signal.pulse_fwhm_ns");
  m.rep_rate_hz = num(cfg, "signal.rep_rate_hz");
  m.noise_rate_hz = num(cfg, "signal.background_rate_hz") + num(cfg, "signal.dark_count_rate_hz");
  m.total_loss_db = total_signal_loss_db(cfg);
  m.gate_width_ns = num(cfg, "signal.gate_width_ns");
  m.timing_sigma_ns = num(cfg, "signal.timing_sigma_ns");
  return m;
}

photonsim::SimConfig sim_config(const Json& cfg) {
  photonsim::SimConfig s;
  s.n_pulses = count(cfg, "sim.n_pulses");
  s.mu = num(cfg, "signal.mu");
  for (const auto& k : get_path(cfg, "sim.intensity_schedule")) {
    if (!k.is_object() || !k.contains("mu") || !k.contains("p") || !k["mu"].is_number() || !k["p"].is_number())
      throw ConfigError("sim.intensity_schedule entries must be {\"mu\": number, \"p\": number}");
    s.intensity_schedule.push_back({k["mu"].get<double>(), k["p"].get<double>()});
  }
  s.pulse_fwhm_ns = num(cfg, "signal.pulse_fwhm_ns");
  s.timing_sigma_ns = num(cfg, "signal.timing_sigma_ns");
  s.rep_rate_hz = num(cfg, "signal.rep_rate_hz");
  s.total_loss_db = total_signal_loss_db(cfg);
  s.background_rate_hz = num(cfg, "signal.background_rate_hz");
  s.dark_count_rate_hz = num(cfg, "signal.dark_count_rate_hz");
  s.e_sp = num(cfg, "qber.e_sp");
  s.e_pbs = num(cfg, "qber.e_pbs");
  s.e_a = num(cfg, "qber.e_a");
  s.basis_bias_px = num(cfg, "sim.basis_bias_px");
  s.dead_time_ns = num(cfg, "sim.dead_time_ns");
  s.seed = count(cfg, "seed");
  s.block_pulses = count(cfg, "sim.block_pulses");
  return s;
}

hdbcsync::HdbcConfig hdbc_config(const Json& cfg) {
  hdbcsync::HdbcConfig h;
  h.order_k = static_cast<int>(count(cfg, "hdbc.order_k"));
  h.beacon_rate_hz = num(cfg, "hdbc.beacon_rate_hz");
  h.ppm_offset_fraction = num(cfg, "hdbc.ppm_offset_fraction");
  return h;
}

distill::AnalyticInputs analytic_inputs(const Json& cfg) {
  distill::AnalyticInputs in;
  in.signal = signal_model(cfg);
  in.e_intrinsic = qbermodel::intrinsic_qber(num(cfg, "qber.e_sp"), num(cfg, "qber.e_pbs"));
  in.e_a = num(cfg, "qber.e_a");
  in.basis_bias_px = num(cfg, "sim.basis_bias_px");
  in.f_ec = num(cfg, "distill.f_ec");
  in.noise_error_fraction = num(cfg, "qber.noise_error_fraction");
  in.multiphoton = distill::multiphoton_model_from_string(text(cfg, "distill.multiphoton_model"));
  return in;
}

std::vector<SweepSpec> sweep_specs(const Json& cfg) {
  std::vector<SweepSpec> out;
  const Json& sweeps = get_path(cfg, "sweeps");
  if (!sweeps.is_array()) throw ConfigError("'sweeps' must be an array");
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    const Json& s = sweeps[i];
    const std::string where = "sweeps." + std::to_string(i);
    if (!s.is_object() || !s.contains("axis")) throw ConfigError(where + " needs an 'axis' object");
    SweepSpec spec;
    spec.label = s.value("label", std::string{"sweep"});
    const Json& axis = s["axis"];
    if (!axis.contains("path") || !axis["path"].is_string() || !axis.contains("values") || !axis["values"].is_array())
      throw ConfigError(where + ".axis needs 'path' and 'values'");
    spec.axis_path = axis["path"].get<std::string>();
    for (const auto& v : axis["values"]) spec.axis_values.push_back(v);
    if (spec.axis_values.empty()) throw ConfigError(where + ".axis.values is empty");
    get_path(cfg, spec.axis_path);
    if (s.contains("series")) {
      const Json& series = s["series"];
      if (!series.contains("path") || !series["path"].is_string() || !series.contains("values") ||
          !series["values"].is_array())
        throw ConfigError(where + ".series needs 'path' and 'values'");
      spec.series_path = series["path"].get<std::string>();
      for (const auto& v : series["values"]) spec.series_values.push_back(v);
      if (spec.series_values.empty()) throw ConfigError(where + ".series.values is empty");
      get_path(cfg, spec.series_path);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<std::string> validate_config(const Json& cfg) {
  std::vector<std::string> d;

  check(d, "orbit", [&] {
    orbitlink::validate(orbit_config(cfg));
    if (!(num(cfg, "orbit.timestep_s") > 0.0)) throw ConfigError("timestep_s must be positive");
  });
  for (auto kind : {orbitlink::ChannelKind::quantum, orbitlink::ChannelKind::beacon}) {
    check(d, std::string{orbitlink::to_string(kind)} + "_link", [&] {
      const auto l = link_terms(cfg, kind);
      orbitlink::effective_divergence(l.beam);
      if (!(l.rx_diameter_m > 0.0)) throw ConfigError("rx_diameter_m must be positive");
      for (double t : {l.tx_internal_db, l.turbulence_pointing_db, l.ogs_internal_db, l.detector_efficiency_db})
        if (!(t >= 0.0)) throw ConfigError("loss terms must be nonnegative");
    });
  }

  auto check_signal = [&](const Json& c, const std::string& where) {
    check(d, where, [&] {
      const auto m = signal_model(c);
      if (!(m.mu > 0.0 && m.mu <= 2.0)) throw ConfigError("mu must lie in (0, 2]");
      for (const char* p : {"signal.channel_loss_db", "signal.system_loss_db", "signal.detector_loss_db"})
        if (!(num(c, p) >= 0.0)) throw ConfigError(std::string{p} + " must be nonnegative");
      if (!(num(c, "signal.background_rate_hz") >= 0.0) || !(num(c, "signal.dark_count_rate_hz") >= 0.0))
        throw ConfigError("noise rates must be nonnegative");
      qbermodel::validate(m);
    });
  };
  check_signal(cfg, "signal");

  check(d, "qber", [&] {
    qbermodel::compose(num(cfg, "qber.e_sp"), num(cfg, "qber.e_pbs"), num(cfg, "qber.e_a"), 0.0, 0.0);
    const double f = num(cfg, "qber.noise_error_fraction");
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("noise_error_fraction must lie in [0, 1]");
  });
  check(d, "sim", [&] {
    const auto s = sim_config(cfg);
    photonsim::validate(s);
    const auto sched = photonsim::schedule(s);
    if (sched.size() != 1 && sched.size() != 3)
      throw ConfigError("intensity_schedule must be empty or list signal, decoy and vacuum classes");
    if (sched.size() == 3 && !(sched[0].mu > sched[1].mu && sched[1].mu > 0.0 && sched[2].mu == 0.0))
      throw ConfigError("intensity_schedule must be ordered signal > decoy > vacuum = 0");
    flag(cfg, "sim.enabled");
    flag(cfg, "sim.dump_events");
  });
  check(d, "hdbc", [&] {
    hdbcsync::validate(hdbc_config(cfg));
    flag(cfg, "hdbc.enabled");
    const double e = num(cfg, "hdbc.erasure_probability");
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("erasure_probability must lie in [0, 1)");
    if (!(std::fabs(num(cfg, "hdbc.drift")) <= 1e-4)) throw ConfigError("drift must be within 100 ppm");
    if (!(num(cfg, "hdbc.jitter_ps") >= 0.0)) throw ConfigError("jitter_ps must be nonnegative");
    num(cfg, "hdbc.offset_ps");
    if (count(cfg, "hdbc.window_periods") < count(cfg, "hdbc.order_k"))
      throw ConfigError("window_periods must be at least order_k");
  });
  check(d, "distill", [&] {
    if (!(num(cfg, "distill.f_ec") >= 1.0)) throw ConfigError("f_ec must be at least 1");
    distill::multiphoton_model_from_string(text(cfg, "distill.multiphoton_model"));
    flag(cfg, "distill.cascade");
    if (count(cfg, "distill.cascade_passes") < 1) throw ConfigError("cascade_passes must be at least 1");
    const double ms = num(cfg, "distill.decoy.mu_signal");
    const double md = num(cfg, "distill.decoy.mu_decoy");
    if (!(ms > md && md > 0.0 && ms <= 2.0)) throw ConfigError("decoy intensities must satisfy 2 >= mu_signal > mu_decoy > 0");
    const double ps = num(cfg, "distill.decoy.p_signal");
    const double pd = num(cfg, "distill.decoy.p_decoy");
    const double pv = num(cfg, "distill.decoy.p_vacuum");
    if (!(ps >= 0.0 && pd >= 0.0 && pv >= 0.0) || std::fabs(ps + pd + pv - 1.0) > 1e-9)
      throw ConfigError("decoy probabilities must be nonnegative and sum to 1");
    const double px = num(cfg, "distill.decoy.basis_bias_px");
    if (!(px >= 0.0 && px <= 1.0)) throw ConfigError("decoy basis_bias_px must lie in [0, 1]");
  });
  check(d, "projection", [&] {
    num(cfg, "projection.shift_right_db");
    num(cfg, "projection.shift_up_db");
  });

  std::vector<SweepSpec> specs;
  check(d, "sweeps", [&] { specs = sweep_specs(cfg); });
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    std::size_t reported = 0;
    const std::vector<Json> series = s.series_values.empty() ? std::vector<Json>{Json()} : s.series_values;
    for (const auto& sv : series) {
      for (const auto& av : s.axis_values) {
        Json c = cfg;
        const std::size_t before = d.size();
        check(d, "sweeps." + std::to_string(i), [&] {
          if (!s.series_path.empty()) set_path(c, s.series_path, sv);
          set_path(c, s.axis_path, av);
        });
        if (d.size() == before) check_signal(c, "sweeps." + std::to_string(i) + " at " + s.axis_path + "=" + av.dump());
        if (d.size() > before && ++reported >= 3) break;
      }
      if (reported >= 3) break;
    }
  }
  return d;
}

}  // namespace qkdbench::runner
