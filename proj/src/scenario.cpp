#include "kktx/scenario.hpp"

#include <cmath>
#include <sstream>

#include "kktx/errors.hpp"

namespace kktx {

std::string to_string(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::KkPamSsb:
      return "kkpam";
    case SchemeKind::TwoSidedPolMux:
      return "tskk";
    case SchemeKind::CoherentQam16:
      return "coherent16qam";
  }
  return "unknown";
}

std::string LinkScenario::axis_name() const { return axis == SweepAxis::Osnr ? "osnr_db" : "cd_ps_nm"; }

const std::vector<double>& LinkScenario::axis_values() const {
  return axis == SweepAxis::Osnr ? osnr_sweep_db : cd_sweep_ps_nm;
}

double LinkScenario::total_dispersion_ps_nm() const {
  if (link_model == LinkModel::BackToBack) return 0.0;
  double total = 0.0;
  for (const auto& s : spans) total += s.total_dispersion_ps_nm();
  return total;
}

InterleaverPair LinkScenario::interleavers() const {
  InterleaverPair pair = make_interleavers(interleaver.order, interleaver.bw3db_hz, interleaver_offset_hz);
  pair.lower.semantics = interleaver.semantics;
  pair.upper.semantics = interleaver.semantics;
  return pair;
}

namespace {

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-6; }

void check_even_length(double n_symbols, double rate_hz, double baud_hz, const std::string& what) {
  const double n = n_symbols * rate_hz / baud_hz;
  if (!is_integer(n) || static_cast<long long>(std::llround(n)) % 2 != 0) {
    std::ostringstream msg;
    msg << what << " of " << rate_hz << " Hz gives " << n
        << " samples per frame; it must be an even integer";
    throw ConfigError(msg.str());
  }
}

}  // namespace

void LinkScenario::validate() const {
  if (n_runs < 1) throw ConfigError("scenario.n_runs must be >= 1");
  if (n_symbols < 64) throw ConfigError("scenario.n_symbols must be >= 64");
  if (samples_per_symbol < 2) throw ConfigError("scenario.samples_per_symbol must be >= 2");
  if (!(baud_hz > 0.0)) throw ConfigError("signal.baud_hz must be positive");
  if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("signal.rolloff must lie in [0, 1]");
  if (order != 4) throw ConfigError("signal.order: only 4-level lanes are supported");
  if (bias_or_lo_ratio.empty()) throw ConfigError("tx.ratios must list at least one value");
  for (double r : bias_or_lo_ratio) {
    if (!(r > 0.0)) throw ConfigError("tx.ratios values must be positive");
  }
  const bool osnr = !osnr_sweep_db.empty();
  const bool cd = !cd_sweep_ps_nm.empty();
  if (osnr && cd) {
    throw ConfigError("give at most one of sweep.osnr_db and sweep.cd_ps_nm");
  }
  if (cd && scheme != SchemeKind::KkPamSsb) {
    throw ConfigError("a dispersion sweep is only defined for the KK-PAM scheme");
  }
  if (cd && link_model == LinkModel::Manakov) {
    throw ConfigError("a dispersion sweep replaces the link by pure dispersion; use link.model = linear");
  }
  if (cd_compensation.empty()) throw ConfigError("rx.cd_compensation is empty");
  if (n_wdm < 1 || n_wdm % 2 == 0) throw ConfigError("wdm.channels must be odd and >= 1");
  if (n_wdm > 1 && !(spacing_hz > 0.0)) throw ConfigError("wdm.spacing_hz must be positive");
  if (link_model == LinkModel::Manakov && spans.empty()) throw ConfigError("link.spans must be >= 1");
  for (const auto& s : spans) s.validate();
  if (!(steps.step_km > 0.0)) throw ConfigError("link.step_km must be positive");
  if (!(steps.max_phase_rad >= 0.0)) throw ConfigError("link.max_phase_rad must be >= 0");
  noise.validate();
  kk.validate();
  if (rx_filter_enabled) rx_filter.validate();
  interleaver.validate();
  if (training_symbols < 2 || training_symbols > n_symbols) {
    throw ConfigError("rx.training_symbols must lie in [2, n_symbols]");
  }
  if (coherent_baseline && scheme != SchemeKind::TwoSidedPolMux) {
    throw ConfigError("scenario.coherent_baseline is only meaningful for the TS-KK scheme");
  }

  const double fs = sample_rate_hz();
  const double occupied = (1.0 + rolloff) * baud_hz;
  const double half_span = 0.5 * (n_wdm - 1) * spacing_hz + 0.5 * occupied +
                           (scheme == SchemeKind::TwoSidedPolMux ? 0.5 * gap_hz : 0.0);
  if (2.0 * half_span >= fs || (n_wdm > 1 && n_wdm * spacing_hz > fs)) {
    throw ConfigError("simulated band of " + std::to_string(fs) +
                      " Hz does not hold the WDM comb; raise scenario.samples_per_symbol");
  }
  if (scheme == SchemeKind::TwoSidedPolMux) {
    if (!(gap_hz >= 0.0)) throw ConfigError("tx.gap_hz must be non-negative");
    if (occupied + gap_hz > spacing_hz) {
      throw ConfigError("tx.gap_hz plus the signal bandwidth exceeds wdm.spacing_hz");
    }
  }
  if (kk.adc_rate_hz > fs) throw ConfigError("rx.adc_rate_hz exceeds the simulation rate");
  check_even_length(static_cast<double>(n_symbols), kk.adc_rate_hz, baud_hz, "rx.adc_rate_hz");
  check_even_length(static_cast<double>(n_symbols), kk.output_rate_hz, baud_hz, "output rate");
}

namespace {

SchemeKind parse_scheme(const std::string& s) {
  if (s == "kkpam") return SchemeKind::KkPamSsb;
  if (s == "tskk") return SchemeKind::TwoSidedPolMux;
  if (s == "coherent16qam") return SchemeKind::CoherentQam16;
  throw ConfigError("scenario.scheme must be kkpam, tskk or coherent16qam, got '" + s + "'");
}

LinkModel parse_model(const std::string& s) {
  if (s == "back_to_back") return LinkModel::BackToBack;
  if (s == "linear") return LinkModel::Linear;
  if (s == "manakov") return LinkModel::Manakov;
  throw ConfigError("link.model must be back_to_back, linear or manakov, got '" + s + "'");
}

std::vector<CdCompensation> parse_compensation(const std::string& s) {
  if (s == "optical") return {CdCompensation::Optical};
  if (s == "digital") return {CdCompensation::Digital};
  if (s == "both") return {CdCompensation::Optical, CdCompensation::Digital};
  throw ConfigError("rx.cd_compensation must be optical, digital or both, got '" + s + "'");
}

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "target_osnr") return NoiseMode::TargetOsnr;
  if (s == "amplifier_chain") return NoiseMode::AmplifierChain;
  throw ConfigError("noise.mode must be target_osnr or amplifier_chain, got '" + s + "'");
}

OrderSemantics parse_semantics(const std::string& s) {
  if (s == "half_exponent") return OrderSemantics::HalfExponent;
  if (s == "total_exponent") return OrderSemantics::TotalExponent;
  throw ConfigError("filter order semantics must be half_exponent or total_exponent");
}

int checked_int(std::int64_t v, const std::string& key) {
  if (v < -2147483647 || v > 2147483647) throw ConfigError(key + " is out of range");
  return static_cast<int>(v);
}

}  // namespace

LinkScenario scenario_from_config(const Config& cfg) {
  LinkScenario sc;
  sc.name = cfg.get_string("scenario.name", sc.name);
  sc.scheme = parse_scheme(cfg.require_string("scenario.scheme"));
  sc.n_runs = checked_int(cfg.get_int("scenario.n_runs", sc.scheme == SchemeKind::KkPamSsb ? 10 : 50),
                          "scenario.n_runs");
  const std::int64_t seed = cfg.get_int("scenario.base_seed", 1);
  if (seed < 0) throw ConfigError("scenario.base_seed must be non-negative");
  sc.base_seed = static_cast<std::uint64_t>(seed);
  sc.n_symbols = cfg.get_int("scenario.n_symbols", sc.n_symbols);
  sc.samples_per_symbol = checked_int(cfg.get_int("scenario.samples_per_symbol", 16),
                                      "scenario.samples_per_symbol");
  sc.coherent_baseline = cfg.get_bool("scenario.coherent_baseline", false);

  sc.baud_hz = cfg.get_double("signal.baud_hz", sc.baud_hz);
  sc.rolloff = cfg.get_double("signal.rolloff", sc.rolloff);
  sc.order = checked_int(cfg.get_int("signal.order", 4), "signal.order");

  if (cfg.has("tx.ratios")) sc.bias_or_lo_ratio = cfg.get_list("tx.ratios");
  sc.gap_hz = cfg.get_double("tx.gap_hz", sc.gap_hz);
  sc.tx_interleaver = cfg.get_bool("tx.interleaver", true);

  sc.interleaver.order = checked_int(cfg.get_int("interleaver.order", 4), "interleaver.order");
  sc.interleaver.bw3db_hz = cfg.get_double("interleaver.bw_hz", 36e9);
  sc.interleaver.semantics = parse_semantics(cfg.get_string("interleaver.order_semantics", "half_exponent"));
  sc.interleaver_offset_hz = cfg.get_double("interleaver.offset_hz", sc.interleaver_offset_hz);

  sc.link_model = parse_model(cfg.get_string("link.model", "linear"));
  const std::int64_t n_spans = cfg.get_int("link.spans", 1);
  if (n_spans < 1 || n_spans > 1000) throw ConfigError("link.spans must lie in [1, 1000]");
  FiberSpanParams span;
  span.length_km = cfg.get_double("link.span_length_km", span.length_km);
  span.dispersion_ps_nm_km = cfg.get_double("link.dispersion_ps_nm_km", span.dispersion_ps_nm_km);
  span.gamma_per_W_km = cfg.get_double("link.gamma_per_w_km", span.gamma_per_W_km);
  span.alpha_db_km = cfg.get_double("link.alpha_db_km", span.alpha_db_km);
  span.reference_wavelength_nm = cfg.get_double("link.wavelength_nm", span.reference_wavelength_nm);
  sc.spans.assign(static_cast<std::size_t>(n_spans), span);
  sc.nonlinear = cfg.get_bool("link.nonlinear", true);
  sc.launch_dbm = cfg.get_double("link.launch_dbm", sc.launch_dbm);
  sc.steps.step_km = cfg.get_double("link.step_km", sc.steps.step_km);
  sc.steps.max_phase_rad = cfg.get_double("link.max_phase_rad", sc.steps.max_phase_rad);
  sc.steps.check_convergence = cfg.get_bool("link.check_convergence", false);
  sc.steps.tolerance = cfg.get_double("link.convergence_tol", sc.steps.tolerance);

  sc.n_wdm = checked_int(cfg.get_int("wdm.channels", 1), "wdm.channels");
  sc.spacing_hz = cfg.get_double("wdm.spacing_hz", sc.spacing_hz);

  sc.osnr_sweep_db = cfg.get_list("sweep.osnr_db");
  sc.cd_sweep_ps_nm = cfg.get_list("sweep.cd_ps_nm");
  sc.axis = sc.cd_sweep_ps_nm.empty() ? SweepAxis::Osnr : SweepAxis::Cd;

  sc.noise.mode = parse_noise_mode(cfg.get_string("noise.mode", "target_osnr"));
  sc.fixed_osnr_db = cfg.get_double("noise.osnr_db", sc.fixed_osnr_db);
  sc.noise.osnr_db = sc.fixed_osnr_db;
  sc.noise.ref_bw_hz = cfg.get_double("noise.ref_bw_hz", sc.noise.ref_bw_hz);
  sc.noise.exclude_bias = cfg.get_bool("noise.exclude_bias", true);
  sc.noise.nf_db = cfg.get_double("noise.nf_db", sc.noise.nf_db);
  sc.noise.loss_budget_db = cfg.get_double("noise.loss_budget_db", sc.noise.loss_budget_db);
  sc.noise.wavelength_nm = span.reference_wavelength_nm;

  sc.cd_compensation = parse_compensation(cfg.get_string("rx.cd_compensation", "digital"));
  sc.rx_filter_enabled = cfg.get_bool("rx.filter", sc.scheme == SchemeKind::KkPamSsb);
  sc.rx_filter.order = checked_int(cfg.get_int("rx.filter_order", 12), "rx.filter_order");
  sc.rx_filter.center_hz = cfg.get_double("rx.filter_center_hz", 16e9);
  sc.rx_filter.bw3db_hz = cfg.get_double("rx.filter_bw_hz", 26e9);
  sc.rx_filter.semantics = parse_semantics(cfg.get_string("rx.filter_order_semantics", "half_exponent"));
  const double adc_default = (sc.scheme == SchemeKind::KkPamSsb ? 17.0 : 20.0) / 16.0 * sc.baud_hz;
  sc.kk.adc_rate_hz = cfg.get_double("rx.adc_rate_hz", adc_default);
  sc.kk.upsample_factor = checked_int(cfg.get_int("rx.upsample", 3), "rx.upsample");
  sc.kk.log_floor_rel = cfg.get_double("rx.log_floor", sc.kk.log_floor_rel);
  sc.kk.output_rate_hz = 2.0 * sc.baud_hz;
  sc.training_symbols = cfg.get_int("rx.training_symbols", sc.training_symbols);

  const auto unused = cfg.unused_keys();
  if (!unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown configuration keys: " + list);
  }
  sc.validate();
  return sc;
}

}  // namespace kktx
