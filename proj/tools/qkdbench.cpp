#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qkdbench/runner.hpp"

namespace rn = qkdbench::runner;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

rn::Json resolve(const std::string& preset, const std::string& config_file, const std::vector<std::string>& sets,
                 const std::optional<std::uint64_t>& seed) {
  if (!preset.empty() && !config_file.empty()) throw rn::ConfigError("give either --preset or --config, not both");
  if (preset.empty() && config_file.empty()) throw rn::ConfigError("one of --preset or --config is required");
  rn::Json cfg = preset.empty() ? rn::load_config_file(config_file) : rn::preset_config(preset);
  for (const auto& s : sets) rn::apply_override(cfg, s);
  if (seed) rn::set_path(cfg, "seed", *seed);
  return cfg;
}

void require_valid(const rn::Json& cfg) {
  const auto diags = rn::validate_config(cfg);
  if (diags.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& d : diags) msg += "\n  " + d;
  throw rn::ConfigError(msg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite BB84 QKD link simulator and experiment harness"};
  app.require_subcommand(1);

  std::string preset;
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool analytic_only = false;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run a preset or config and write its figure data");
  run->add_option("--preset", preset, "Preset name")->check(CLI::IsMember(rn::preset_names()));
  run->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override a leaf: path=value (repeatable)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--analytic-only", analytic_only, "Skip the Monte Carlo pipeline");
  run->add_option("--threads", threads, "Worker threads (capped by QKDBENCH_THREADS)");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a config file and list every problem");
  validate->add_option("--config", validate_file, "JSON config file")->required()->check(CLI::ExistingFile);

  std::string pass_file;
  std::string pass_out;
  auto* pass = app.add_subcommand("pass", "Write the satellite pass profile as CSV");
  pass->add_option("--config", pass_file, "JSON config file")->required()->check(CLI::ExistingFile);
  pass->add_option("--out", pass_out, "Output CSV (default: stdout)");

  std::string show_preset;
  auto* show = app.add_subcommand("show", "Print a preset's resolved config");
  show->add_option("preset", show_preset, "Preset name")->required()->check(CLI::IsMember(rn::preset_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      const rn::Json cfg = resolve(preset, config_file, sets, seed);
      require_valid(cfg);
      rn::RunOptions opt;
      opt.threads = rn::default_threads();
      if (threads > 0) opt.threads = std::min(opt.threads, threads);
      opt.monte_carlo = !analytic_only;
      const auto files = rn::run_preset(cfg, out_dir, opt);
      for (const auto& f : files) std::cout << f.string() << '\n';
      return kOk;
    }
    if (*validate) {
      const rn::Json cfg = rn::load_config_file(validate_file);
      const auto diags = rn::validate_config(cfg);
      for (const auto& d : diags) std::cerr << d << '\n';
      if (!diags.empty()) return kConfigError;
      std::cout << "ok\n";
      return kOk;
    }
    if (*pass) {
      const rn::Json cfg = rn::load_config_file(pass_file);
      require_valid(cfg);
      if (pass_out.empty()) {
        rn::write_pass_csv(std::cout, cfg);
      } else {
        std::ofstream out(pass_out, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + pass_out + "'");
        rn::write_pass_csv(out, cfg);
        if (!out.flush()) throw std::runtime_error("error while writing '" + pass_out + "'");
      }
      return kOk;
    }
    if (*show) {
      std::cout << rn::preset_config(show_preset).dump(2) << '\n';
      return kOk;
    }
  } catch (const rn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
