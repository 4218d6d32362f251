#pragma once

// CSV and run-manifest emission. The manifest echoes the effective
// configuration so that any output directory can be regenerated exactly.

#include <string>

#include "kktx/config.hpp"
#include "kktx/experiment.hpp"

namespace kktx {

inline constexpr const char* kToolkitName = "kktx";
inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kManifestSchemaVersion = 1;

inline constexpr const char* kCsvHeader =
    "axis_name,axis_value,bias_or_lo_ratio,scheme,sideband,polarization,n_bits,n_errors,ber,"
    "min_phase_violations,clip_count,seed_base";
inline constexpr const char* kTheoryCsvHeader = "axis_name,axis_value,scheme,ber";

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

std::string results_csv(const SweepResult& result);
std::string theory_csv(const SweepResult& result);
/// JSON manifest: schema version, toolkit version, config echo and the
/// seeds of every run. Contains nothing time-dependent.
std::string manifest_json(const SweepResult& result, const Config& config, const LinkScenario& sc);

/// Writes results.csv, theory.csv and manifest.json into `out_dir`,
/// creating it if needed. Throws Error naming the path on I/O failure.
void emit_results(const SweepResult& result, const Config& config, const LinkScenario& sc,
                  const std::string& out_dir);

}  // namespace kktx
