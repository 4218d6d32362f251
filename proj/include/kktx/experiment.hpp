#pragma once

// Seeded, job-parallel execution of a LinkScenario. Every job is one
// independent run (and, for KK-PAM, one bias ratio); its counts are reduced
// in job order so the result does not depend on the worker count.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kktx/receiver.hpp"
#include "kktx/scenario.hpp"

namespace kktx {

/// One CSV row: counts summed over runs for a (point, ratio, scheme,
/// sideband, polarization) combination.
struct SweepRow {
  std::string axis_name;
  double axis_value = 0.0;
  double bias_or_lo_ratio = 0.0;
  std::string scheme;
  std::string sideband;
  std::string polarization;
  long long n_bits = 0;
  long long n_errors = 0;
  double ber = 0.0;
  long long min_phase_violations = 0;
  long long clip_count = 0;
  std::uint64_t seed_base = 0;
};

/// Analytic reference curve sample.
struct TheoryRow {
  std::string axis_name;
  double axis_value = 0.0;
  std::string scheme;
  double ber = 0.0;
};

struct SweepResult {
  std::string scenario_name;
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<SweepRow> rows;
  std::vector<TheoryRow> theory;
  /// Diagnostic only; never written to the manifest.
  double wall_time_s = 0.0;

  /// Rows matching the given labels; an empty label matches anything.
  std::vector<SweepRow> select(const std::string& scheme, double ratio = -1.0,
                               const std::string& sideband = "",
                               const std::string& polarization = "") const;
};

struct RunOptions {
  int jobs = 1;
  /// Called from worker threads after each finished job.
  std::function<void(const std::string&)> progress;
};

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Stable per-purpose seed derived from a run seed and up to three indices.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t tag, std::uint64_t a = 0,
                          std::uint64_t b = 0, std::uint64_t c = 0);

/// KK-PAM versus OSNR_eq with the compensation modes listed in the scenario.
SweepResult run_kkpam_linear(const LinkScenario& sc, const RunOptions& opts = {});
/// KK-PAM versus accumulated dispersion at the scenario's fixed OSNR_eq.
SweepResult run_kkpam_cd_sweep(const LinkScenario& sc, const RunOptions& opts = {});
/// Central channel of a KK-PAM WDM comb after nonlinear propagation.
SweepResult run_kkpam_wdm_nonlinear(const LinkScenario& sc, const RunOptions& opts = {});
/// Two-sided polarization-multiplexed KK, per sideband and polarization,
/// plus the coherent 16-QAM reference when the scenario asks for it.
SweepResult run_tskk(const LinkScenario& sc, const RunOptions& opts = {});
/// Ideal dual-polarization coherent 16-QAM receiver over the same link.
SweepResult run_coherent16qam_baseline(const LinkScenario& sc, const RunOptions& opts = {});

/// Dispatches on scheme and sweep axis.
SweepResult run_scenario(const LinkScenario& sc, const RunOptions& opts = {});

/// Launch power per channel in watts.
double launch_power_w(const LinkScenario& sc);

}  // namespace kktx
