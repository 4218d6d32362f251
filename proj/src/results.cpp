#include "kktx/results.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "kktx/errors.hpp"

namespace kktx {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

std::string results_csv(const SweepResult& result) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << r.axis_name << ',' << format_double(r.axis_value) << ',' << format_double(r.bias_or_lo_ratio)
        << ',' << r.scheme << ',' << r.sideband << ',' << r.polarization << ',' << r.n_bits << ','
        << r.n_errors << ',' << format_double(r.ber) << ',' << r.min_phase_violations << ','
        << r.clip_count << ',' << r.seed_base << '\n';
  }
  return out.str();
}

std::string theory_csv(const SweepResult& result) {
  std::ostringstream out;
  out << kTheoryCsvHeader << '\n';
  for (const auto& t : result.theory) {
    out << t.axis_name << ',' << format_double(t.axis_value) << ',' << t.scheme << ','
        << format_double(t.ber) << '\n';
  }
  return out.str();
}

std::string manifest_json(const SweepResult& result, const Config& config, const LinkScenario& sc) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kManifestSchemaVersion;
  doc["toolkit"] = kToolkitName;
  doc["toolkit_version"] = kToolkitVersion;
  doc["scenario"] = result.scenario_name;
  doc["scheme"] = to_string(sc.scheme);
  doc["axis_name"] = result.axis_name;
  doc["base_seed"] = sc.base_seed;
  doc["n_runs"] = sc.n_runs;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (int run = 0; run < sc.n_runs; ++run) seeds.push_back(sc.base_seed + static_cast<std::uint64_t>(run));
  doc["run_seeds"] = seeds;
  doc["outputs"] = {"results.csv", "theory.csv"};
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.values()) echo[k] = v;
  doc["config"] = echo;
  return doc.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void emit_results(const SweepResult& result, const Config& config, const LinkScenario& sc,
                  const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "results.csv", results_csv(result));
  write_file(dir / "theory.csv", theory_csv(result));
  write_file(dir / "manifest.json", manifest_json(result, config, sc));
}

}  // namespace kktx
