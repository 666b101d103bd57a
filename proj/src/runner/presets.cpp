#include <cmath>

#include "qkdbench/runner.hpp"

namespace qkdbench::runner {

namespace {

Json channel_loss_grid() {
  return Json{6.3, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0,
              25.0, 26.0, 28.0, 30.0, 32.0, 34.0, 36.0, 37.0, 37.7};
}

// Five points per decade, rounded to three significant figures.
Json log_grid(double lo, double hi) {
  Json out = Json::array();
  const int k0 = static_cast<int>(std::floor(std::log10(lo) * 5.0 + 1e-9));
  for (int k = k0;; ++k) {
    double v = std::pow(10.0, k / 5.0);
    const double mag = std::pow(10.0, std::floor(std::log10(v)) - 2.0);
    v = std::round(v / mag) * mag;
    if (v > hi * (1.0 + 1e-9)) break;
    if (v >= lo * (1.0 - 1e-9)) out.push_back(v);
  }
  if (out.empty() || out.back().get<double>() < hi) out.push_back(hi);
  return out;
}

Json gate_grid() {
  return Json{0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2,
              1.4, 1.6, 1.8, 2.0, 2.4, 2.8, 3.3, 3.8, 4.4, 5.0, 5.5, 6.0, 6.5, 7.0};
}

Json sweep(const char* label, const char* axis, Json axis_values) {
  return Json{{"label", label}, {"axis", {{"path", axis}, {"values", std::move(axis_values)}}}};
}

Json sweep(const char* label, const char* series, Json series_values, const char* axis, Json axis_values) {
  Json s = sweep(label, axis, std::move(axis_values));
  s["series"] = {{"path", series}, {"values", std::move(series_values)}};
  return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "table3"}; }

Json preset_config(std::string_view name) {
  Json c = default_config();
  c["figure"] = std::string{name};
  if (name == "fig2") {
    // 2.7 kHz total: 2.3 kHz dark counts plus 0.4 kHz stray light.
    c["sweeps"] = Json::array({sweep("channel_loss", "signal.channel_loss_db", channel_loss_grid())});
  } else if (name == "fig3") {
    c["signal"]["dark_count_rate_hz"] = 0.0;  // axis is the total count rate
    c["sweeps"] = Json::array({sweep("noise", "signal.channel_loss_db", Json{10.0, 16.0, 25.0},
                                     "signal.background_rate_hz", log_grid(100.0, 3e6))});
  } else if (name == "fig4") {
    c["signal"]["background_rate_hz"] = 400e3;
    c["sweeps"] = Json::array({sweep("gate_width", "signal.channel_loss_db", Json{10.0, 20.0, 30.0, 37.0},
                                     "signal.gate_width_ns", gate_grid())});
  } else if (name == "fig5") {
    c["signal"]["channel_loss_db"] = 16.0;
    c["signal"]["background_rate_hz"] = 50e3;
    c["sweeps"] = Json::array({sweep("mu", "signal.mu", Json{0.1, 0.3, 0.5, 0.8, 1.0}),
                               sweep("loss_noise", "signal.channel_loss_db", Json{10.0, 16.0, 25.0},
                                     "signal.background_rate_hz", Json{5e3, 2e4, 1e5, 4e5})});
  } else if (name == "fig6") {
    c["sweeps"] = Json::array({sweep("channel_loss", "signal.channel_loss_db", channel_loss_grid())});
  } else if (name == "fig7" || name == "table3") {
    c["sim"]["enabled"] = false;
  } else {
    throw ConfigError("unknown preset '" + std::string{name} + "'");
  }
  return c;
}

}  // namespace qkdbench::runner
