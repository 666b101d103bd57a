#pragma once

// Experiment configuration, presets, sweeps and figure-data emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qkdbench/distill.hpp"
#include "qkdbench/hdbcsync.hpp"
#include "qkdbench/orbitlink.hpp"
#include "qkdbench/photonsim.hpp"
#include "qkdbench/qbermodel.hpp"

namespace qkdbench::runner {

using Json = nlohmann::ordered_json;

// Problems with the configuration itself (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json default_config();
std::vector<std::string> preset_names();
Json preset_config(std::string_view name);

// Reads a JSON config. A top-level "preset" key starts from that preset;
// every other key is merged onto it and must already exist.
Json load_config_file(const std::filesystem::path& path);
Json parse_config_text(std::string_view text);

// Dotted-path access; unknown paths raise ConfigError.
const Json& get_path(const Json& cfg, std::string_view path);
void set_path(Json& cfg, std::string_view path, const Json& value);
// "path=value"; the value is parsed as JSON when possible, else taken as a string.
void apply_override(Json& cfg, std::string_view assignment);

// All invariant violations, empty when the config is usable.
std::vector<std::string> validate_config(const Json& cfg);

// Typed views of a config tree.
orbitlink::OrbitConfig orbit_config(const Json& cfg);
orbitlink::LinkTerms link_terms(const Json& cfg, orbitlink::ChannelKind kind);
double total_signal_loss_db(const Json& cfg);
qbermodel::SignalModel signal_model(const Json& cfg);
photonsim::SimConfig sim_config(const Json& cfg);
hdbcsync::HdbcConfig hdbc_config(const Json& cfg);
distill::AnalyticInputs analytic_inputs(const Json& cfg);

struct SweepSpec {
  std::string label;
  std::string series_path;  // empty for a single series
  std::vector<Json> series_values;
  std::string axis_path;
  std::vector<Json> axis_values;
};

std::vector<SweepSpec> sweep_specs(const Json& cfg);

struct MonteCarloResult {
  std::uint64_t pulses = 0;
  std::uint64_t clicks = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t signal = 0;  // truth-tagged in-gate clicks of the key class
  std::uint64_t noise = 0;
  double gain = 0.0;
  double gain_se = 0.0;
  double qber = 0.0;
  double qber_se = 0.0;
  double esnr = 0.0;
  distill::KeyRateResult rate;
  bool decoy = false;
  bool cascade_failed = false;
  std::size_t sync_pairs = 0;
  double clock_residual_ps = 0.0;
  double clock_drift = 0.0;
};

struct SweepPoint {
  std::string label;
  std::string series_path;
  Json series_value;
  std::string axis_path;
  Json axis_value;
  Json config;  // fully resolved point configuration
  distill::AnalyticPoint analytic;
  double analytic_skr_bps = 0.0;
  double analytic_decoy_rate = 0.0;
  double analytic_decoy_skr_bps = 0.0;
  double analytic_skr_norm = 0.0;
  std::optional<MonteCarloResult> mc;
  double mc_skr_norm = 0.0;
  std::string status = "ok";
};

struct RunOptions {
  unsigned threads = 1;
  bool monte_carlo = true;  // false forces analytic-only rows
};

// Worker cap from QKDBENCH_THREADS, else the hardware concurrency.
unsigned default_threads();

std::vector<SweepPoint> run_sweep(const Json& cfg, const RunOptions& options);

// Monte Carlo pipeline for one configuration over several gate widths
// (one simulation, re-gated per width).
std::vector<MonteCarloResult> run_monte_carlo(const Json& cfg, const std::vector<double>& gate_widths_ns,
                                              unsigned threads);

// Writes every artifact of a preset run into `dir`; returns the files written.
std::vector<std::filesystem::path> run_preset(const Json& cfg, const std::filesystem::path& dir,
                                              const RunOptions& options);

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);
void write_pass_csv(std::ostream& out, const Json& cfg);
void write_table3_csv(std::ostream& out, const Json& cfg);
void write_projection_csv(std::ostream& out, const Json& cfg, const std::vector<SweepPoint>& points);
Json point_summary(const SweepPoint& point);
std::string gnuplot_script(const Json& cfg, const std::string& csv_name);
// Writes the detection log, transmitter log and beacon log of the base
// configuration (no sweep) as event dumps.
std::vector<std::filesystem::path> dump_events(const Json& cfg, const std::filesystem::path& dir, unsigned threads);

std::string format_number(double v);

}  // namespace qkdbench::runner
