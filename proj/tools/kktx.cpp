// Command-line front end: run, sweep, validate and selftest.
// Exit codes: 0 success, 1 configuration error, 2 runtime or convergence error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kktx/channel.hpp"
#include "kktx/config.hpp"
#include "kktx/errors.hpp"
#include "kktx/experiment.hpp"
#include "kktx/results.hpp"
#include "kktx/scenario.hpp"
#include "kktx/selftest.hpp"

namespace {

using namespace kktx;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::int64_t seed = -1;
  std::int64_t symbols = -1;
  std::vector<std::string> overrides;
  bool quiet = false;
};

Config load_config(const CommonArgs& args) {
  Config cfg = Config::load(args.config_path);
  for (const auto& o : args.overrides) cfg.apply_override(o);
  if (args.seed >= 0) cfg.set("scenario.base_seed", std::to_string(args.seed));
  if (args.symbols >= 0) cfg.set("scenario.n_symbols", std::to_string(args.symbols));
  return cfg;
}

int do_run(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const LinkScenario sc = scenario_from_config(cfg);
  RunOptions opts;
  opts.jobs = args.jobs;
  if (!args.quiet) opts.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
  const SweepResult result = run_scenario(sc, opts);
  const std::string out = args.out_dir.empty() ? "out/" + sc.name : args.out_dir;
  emit_results(result, cfg, sc, out);
  std::cerr << "wrote " << result.rows.size() << " rows to " << out << " in " << result.wall_time_s
            << " s\n";
  return 0;
}

void line(const std::string& key, const std::string& value) {
  std::cout << "  " << key << ": " << value << '\n';
}

std::string num(double v) { return format_double(v); }

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + num(x);
  return s.empty() ? "(empty)" : s;
}

int do_validate(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const LinkScenario sc = scenario_from_config(cfg);
  const PulseShape pulse = sc.pulse();
  std::cout << "scenario " << sc.name << " is valid\n";
  line("scheme", to_string(sc.scheme));
  line("sweep axis", sc.axis_name() + " = " + list(sc.axis_values()));
  line("bias/LO ratios", list(sc.bias_or_lo_ratio));
  line("runs x symbols", std::to_string(sc.n_runs) + " x " + std::to_string(sc.n_symbols));
  line("simulation rate [GHz]", num(sc.sample_rate_hz() * 1e-9));
  line("samples per frame", std::to_string(sc.n_symbols * sc.samples_per_symbol));
  line("ADC rate [GHz]", num(sc.kk.adc_rate_hz * 1e-9));
  line("KK working rate [GHz]", num(sc.kk.adc_rate_hz * sc.kk.upsample_factor * 1e-9));
  line("launch power per channel [dBm]", num(sc.launch_dbm));
  line("total dispersion [ps/nm]", num(sc.total_dispersion_ps_nm()));
  line("total beta2 [ps^2]",
       num(beta2_total_s2(sc.total_dispersion_ps_nm(), sc.spans.front().reference_wavelength_nm) * 1e24));
  line("signal half bandwidth [GHz]", num(pulse.half_bandwidth_hz() * 1e-9));
  if (sc.scheme == SchemeKind::KkPamSsb && sc.rx_filter_enabled) {
    const double bias_t = std::pow(sc.rx_filter.magnitude(0.0), 2);
    line("receiver filter bias transmissivity [dB]", num(10.0 * std::log10(bias_t)));
    line("receiver filter at signal edge [dB]",
         num(20.0 * std::log10(sc.rx_filter.magnitude(pulse.half_bandwidth_hz()))));
  }
  if (sc.scheme == SchemeKind::TwoSidedPolMux) {
    const TwoSidedBandwidth bw = two_sided_bandwidth(pulse, sc.gap_hz);
    line("occupied bandwidth nominal [GHz]", num(bw.nominal_hz * 1e-9));
    line("occupied bandwidth incl. roll-off [GHz]", num(bw.rolloff_inclusive_hz * 1e-9));
    line("spectral efficiency loss [%]", num(100.0 * bw.efficiency_loss));
    const InterleaverPair il = sc.interleavers();
    line("interleaver at carrier [dB]", num(20.0 * std::log10(il.upper.magnitude(0.0))));
  }
  const auto unused = cfg.unused_keys();
  for (const auto& k : unused) std::cout << "  warning: unused key " << k << '\n';
  return 0;
}

int do_selftest() {
  bool ok = true;
  for (const auto& r : run_selftest()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 2;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_overrides) {
  cmd->add_option("config", args.config_path, "Scenario config or run manifest")->required();
  cmd->add_option("--out", args.out_dir, "Output directory (default out/<name>)");
  cmd->add_option("--jobs", args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "Override scenario.base_seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--symbols", args.symbols, "Override scenario.n_symbols")->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", args.quiet, "Suppress progress messages");
  if (with_overrides) cmd->add_option("--override", args.overrides, "section.key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kramers-Kronig transceiver simulation toolkit"};
  app.set_version_flag("--version", std::string(kktx::kToolkitVersion));
  app.require_subcommand(1);
  CommonArgs run_args, sweep_args, validate_args;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write results");
  add_common(run, run_args, false);
  CLI::App* sweep = app.add_subcommand("sweep", "Run a scenario with key overrides");
  add_common(sweep, sweep_args, true);
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario and print derived values");
  add_common(validate, validate_args, true);
  app.add_subcommand("selftest", "Run the numerical property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return do_run(run_args);
    if (*sweep) return do_run(sweep_args);
    if (*validate) return do_validate(validate_args);
    return do_selftest();
  } catch (const kktx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
