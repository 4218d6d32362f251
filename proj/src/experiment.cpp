#include "kktx/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <tuple>

#include "kktx/channel.hpp"
#include "kktx/errors.hpp"

namespace kktx {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t tag, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(run_seed);
  for (std::uint64_t v : {tag, a, b, c}) h = splitmix64(h ^ v);
  return h;
}

std::vector<SweepRow> SweepResult::select(const std::string& scheme, double ratio,
                                          const std::string& sideband,
                                          const std::string& polarization) const {
  std::vector<SweepRow> out;
  for (const auto& r : rows) {
    if (!scheme.empty() && r.scheme != scheme) continue;
    if (ratio >= 0.0 && r.bias_or_lo_ratio != ratio) continue;
    if (!sideband.empty() && r.sideband != sideband) continue;
    if (!polarization.empty() && r.polarization != polarization) continue;
    out.push_back(r);
  }
  return out;
}

double launch_power_w(const LinkScenario& sc) { return 1e-3 * std::pow(10.0, sc.launch_dbm / 10.0); }

namespace {

enum SeedTag : std::uint64_t { kFrameTag = 1, kNoiseTag = 2, kPolTag = 3 };

// Scheme labels also fix the row order inside one (point, ratio) group.
enum class RowScheme { KkOptical, KkDigital, TsKk, Coherent };
enum class RowSide { Ssb, Upper, Lower, Full };
enum class RowPol { X, Y };

const char* label(RowScheme s) {
  switch (s) {
    case RowScheme::KkOptical:
      return "kkpam-optical-cd";
    case RowScheme::KkDigital:
      return "kkpam-digital-cd";
    case RowScheme::TsKk:
      return "tskk";
    case RowScheme::Coherent:
      return "coherent-16qam";
  }
  return "";
}

const char* label(RowSide s) {
  switch (s) {
    case RowSide::Ssb:
      return "ssb";
    case RowSide::Upper:
      return "upper";
    case RowSide::Lower:
      return "lower";
    case RowSide::Full:
      return "full";
  }
  return "";
}

const char* label(RowPol p) { return p == RowPol::X ? "x" : "y"; }

// (axis index, ratio index, scheme, sideband, polarization)
using RowKey = std::tuple<std::size_t, std::size_t, RowScheme, RowSide, RowPol>;
using JobCounts = std::map<RowKey, BerReport>;

struct Job {
  int run = 0;
  std::size_t ratio_index = 0;
};

// Runs every job on a pool of `workers` threads and merges the per-job
// counts in job order.
JobCounts run_jobs(const std::vector<Job>& jobs, int workers,
                   const std::function<JobCounts(const Job&)>& body, const RunOptions& opts) {
  std::vector<JobCounts> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = body(jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      if (opts.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        opts.progress("job " + std::to_string(i + 1) + "/" + std::to_string(jobs.size()) + " done");
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  JobCounts total;
  for (const auto& r : results) {
    for (const auto& [key, report] : r) total[key].merge(report);
  }
  return total;
}

SweepResult assemble(const LinkScenario& sc, const JobCounts& counts,
                     const std::vector<double>& ratios) {
  SweepResult out;
  out.scenario_name = sc.name;
  out.axis_name = sc.axis_name();
  out.axis_values = sc.axis_values();
  for (const auto& [key, report] : counts) {
    const auto& [ai, ri, scheme, side, pol] = key;
    SweepRow row;
    row.axis_name = out.axis_name;
    row.axis_value = out.axis_values[ai];
    row.bias_or_lo_ratio = scheme == RowScheme::Coherent ? 0.0 : ratios[ri];
    row.scheme = label(scheme);
    row.sideband = label(side);
    row.polarization = label(pol);
    row.n_bits = report.n_bits;
    row.n_errors = report.n_errors;
    row.ber = report.n_bits > 0 ? static_cast<double>(report.n_errors) / static_cast<double>(report.n_bits)
                                : 0.0;
    row.min_phase_violations = report.min_phase_violations;
    row.clip_count = report.clip_count;
    row.seed_base = sc.base_seed;
    out.rows.push_back(std::move(row));
  }
  return out;
}

void add_theory(SweepResult& out, const LinkScenario& sc, const std::string& scheme, int order,
                BerKind kind, int n_sidebands) {
  for (double v : out.axis_values) {
    const double osnr = sc.axis == SweepAxis::Osnr ? v : sc.fixed_osnr_db;
    const double snr = osnr_to_snr(osnr, sc.noise.ref_bw_hz, sc.baud_hz, n_sidebands);
    out.theory.push_back(TheoryRow{out.axis_name, v, scheme, analytic_ber(order, snr, kind)});
  }
}

ComplexSignal scaled(const ComplexSignal& x, double factor) { return x.with_samples(x.samples() * factor); }

DualPolSignal scaled(const DualPolSignal& x, double factor) {
  return DualPolSignal(scaled(x.x(), factor), scaled(x.y(), factor));
}

ComplexSignal conjugated(const ComplexSignal& x) { return x.with_samples(x.samples().conjugate()); }

// Linear or Manakov link; every span is followed by a noiseless amplifier
// restoring the launch level.
DualPolSignal propagate_link(const DualPolSignal& tx, const LinkScenario& sc, double cd_override,
                             bool use_override) {
  const double wl = sc.spans.front().reference_wavelength_nm;
  if (use_override) return apply_cd(tx, cd_override, wl);
  switch (sc.link_model) {
    case LinkModel::BackToBack:
      return tx;
    case LinkModel::Linear:
      return apply_cd(tx, sc.total_dispersion_ps_nm(), wl);
    case LinkModel::Manakov: {
      DualPolSignal x = tx;
      for (const auto& span : sc.spans) {
        FiberSpanParams p = span;
        if (!sc.nonlinear) p.gamma_per_W_km = 0.0;
        x = propagate_manakov(x, p, sc.steps);
        x = scaled(x, std::pow(10.0, p.loss_db() / 20.0));
      }
      return x;
    }
  }
  return tx;
}

double rx_grid_rate(const LinkScenario& sc) {
  return std::min(sc.sample_rate_hz(), 4.0 * sc.baud_hz);
}

ComplexSignal to_rate(const ComplexSignal& x, double rate) {
  return x.sample_rate_hz() > rate ? decimate_to_rate(x, rate) : x;
}

DualPolSignal to_rate(const DualPolSignal& x, double rate) {
  return DualPolSignal(to_rate(x.x(), rate), to_rate(x.y(), rate));
}

NoiseSpec noise_at(const LinkScenario& sc, double osnr_db) {
  NoiseSpec spec = sc.noise;
  spec.osnr_db = osnr_db;
  return spec;
}

bool violates_minimum_phase(const ComplexSignal& x) {
  try {
    return winding_number(x) != 0;
  } catch (const ContractError&) {
    return true;
  }
}

std::vector<double> osnr_points(const LinkScenario& sc) {
  return sc.axis == SweepAxis::Osnr ? sc.osnr_sweep_db : std::vector<double>{sc.fixed_osnr_db};
}

// ---------------------------------------------------------------- KK-PAM

SweepResult run_kkpam(const LinkScenario& sc, const RunOptions& opts) {
  sc.validate();
  const double fs = sc.sample_rate_hz();
  const PulseShape pulse = sc.pulse();
  const double p_s = launch_power_w(sc);
  const double wl = sc.spans.front().reference_wavelength_nm;
  const bool cd_axis = sc.axis == SweepAxis::Cd;
  const double rx_rate = rx_grid_rate(sc);
  const int centre = sc.n_wdm / 2;

  std::vector<Job> jobs;
  for (int run = 0; run < sc.n_runs; ++run) {
    for (std::size_t r = 0; r < sc.bias_or_lo_ratio.size(); ++r) jobs.push_back(Job{run, r});
  }

  auto body = [&](const Job& job) {
    JobCounts counts;
    const std::uint64_t run_seed = sc.base_seed + static_cast<std::uint64_t>(job.run);
    TxConfig tx_cfg;
    tx_cfg.scheme = Scheme::KkPamSsb;
    tx_cfg.bias_power_ratio = sc.bias_or_lo_ratio[job.ratio_index];

    std::vector<DualPolSignal> channels;
    SymbolFrame frame;
    for (int k = 0; k < sc.n_wdm; ++k) {
      SymbolFrame f = make_frame(sc.n_symbols, sc.order, derive_seed(run_seed, kFrameTag, k));
      const KkPamTx tx = build_kkpam(f, pulse, tx_cfg, fs);
      const ComplexSignal field = scaled(tx.field, std::sqrt(p_s / tx.signal_power_w));
      channels.emplace_back(field, ComplexSignal::zeros(field.size(), fs));
      if (k == centre) frame = std::move(f);
    }
    const DualPolSignal launched =
        sc.n_wdm == 1 ? channels.front() : wdm_mux(channels, sc.spacing_hz);

    const std::vector<double> osnrs = osnr_points(sc);
    const std::size_t n_links = cd_axis ? sc.cd_sweep_ps_nm.size() : 1;
    for (std::size_t li = 0; li < n_links; ++li) {
      const double total_cd = cd_axis ? sc.cd_sweep_ps_nm[li] : sc.total_dispersion_ps_nm();
      const ComplexSignal received =
          to_rate(propagate_link(launched, sc, total_cd, cd_axis).x(), rx_rate);
      // OSNR_eq counts P_s alone; the true OSNR also counts the bias.
      const double osnr_power = sc.noise.exclude_bias ? p_s : p_s * (1.0 + tx_cfg.bias_power_ratio);
      for (CdCompensation comp : sc.cd_compensation) {
        const bool optical = comp == CdCompensation::Optical;
        const ComplexSignal pre = optical ? apply_cd(received, -total_cd, wl) : received;
        for (std::size_t oi = 0; oi < osnrs.size(); ++oi) {
          const std::size_t axis_index = cd_axis ? li : oi;
          const ComplexSignal noisy = load_noise_to_osnr(
              pre, noise_at(sc, osnrs[oi]), osnr_power,
              derive_seed(run_seed, kNoiseTag, axis_index, static_cast<std::uint64_t>(comp)));
          const ComplexSignal detected = sc.rx_filter_enabled ? apply_filter(noisy, sc.rx_filter) : noisy;
          const KkResult kk = kk_reconstruct(adc(photodetect(detected), sc.kk.adc_rate_hz), sc.kk);
          ComplexSignal field = optical ? kk.field : cd_compensate(kk.field, total_cd, wl);
          field = remove_constant_phase(field);
          const ComplexSignal lane = extract_real_lane(field, field.samples().mean().real(), 0.0,
                                                       Sideband::Upper, pulse.half_bandwidth_hz());
          BerReport report = decide_and_count(lane, frame, pulse);
          report.clip_count = kk.clip_count;
          report.min_phase_violations = violates_minimum_phase(detected) ? 1 : 0;
          const RowScheme scheme = optical ? RowScheme::KkOptical : RowScheme::KkDigital;
          counts[RowKey{axis_index, job.ratio_index, scheme, RowSide::Ssb, RowPol::X}].merge(report);
        }
      }
    }
    return counts;
  };

  const auto start = std::chrono::steady_clock::now();
  SweepResult out = assemble(sc, run_jobs(jobs, opts.jobs, body, opts), sc.bias_or_lo_ratio);
  add_theory(out, sc, "theory-4pam", 4, BerKind::PamCoherent, 1);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ----------------------------------------------------------------- TS-KK

struct DualPolTx {
  TwoSidedTx x;
  TwoSidedTx y;
};

// Transmitted sideband of one polarization after the receive interleaver,
// at the lane rate; used as the polarization-demultiplexing reference.
Samples sideband_reference(const ComplexSignal& sideband, const FilterSpec& rx_filter, double rate) {
  return decimate_to_rate(apply_filter(sideband, rx_filter), rate).samples();
}

struct TsKkBranch {
  ComplexSignal field;
  bool violation = false;
  Index clips = 0;
};

TsKkBranch receive_branch(const ComplexSignal& branch, bool lower, double lo_amp,
                          const LinkScenario& sc, double total_cd, double wl) {
  const ComplexSignal mapped = lower ? conjugated(branch) : branch;
  const ComplexSignal detected = add_lo(mapped, lo_amp);
  const KkResult kk = kk_reconstruct(adc(photodetect(detected), sc.kk.adc_rate_hz), sc.kk);
  ComplexSignal field = remove_constant_phase(kk.field);
  if (lower) field = conjugated(field);
  const Complex mean = field.samples().mean();
  field = field.with_samples(field.samples().array() - mean);
  return TsKkBranch{cd_compensate(field, total_cd, wl), violates_minimum_phase(detected), kk.clip_count};
}

void run_tskk_job(const LinkScenario& sc, const Job& job, JobCounts& counts) {
  const double fs = sc.sample_rate_hz();
  const PulseShape pulse = sc.pulse();
  const double p_ch = launch_power_w(sc);
  const double wl = sc.spans.front().reference_wavelength_nm;
  const double total_cd = sc.total_dispersion_ps_nm();
  const double rx_rate = rx_grid_rate(sc);
  const double lane_rate = sc.kk.output_rate_hz;
  const int centre = sc.n_wdm / 2;
  const std::uint64_t run_seed = sc.base_seed + static_cast<std::uint64_t>(job.run);

  TxConfig tx_cfg;
  tx_cfg.scheme = Scheme::TwoSided;
  tx_cfg.gap_hz = sc.gap_hz;
  tx_cfg.grid_spacing_hz = sc.spacing_hz;
  tx_cfg.interleaver_offset_hz = sc.interleaver_offset_hz;
  if (sc.tx_interleaver) tx_cfg.interleaver = sc.interleaver;

  // frames[pol][0] = lower-sideband lane, frames[pol][1] = upper-sideband lane
  SymbolFrame frames[2][2];
  std::vector<DualPolSignal> channels;
  double scale_centre = 1.0;
  std::optional<DualPolTx> centre_tx;
  for (int k = 0; k < sc.n_wdm; ++k) {
    SymbolFrame f[2][2];
    for (int p = 0; p < 2; ++p) {
      for (int s = 0; s < 2; ++s) {
        f[p][s] = make_frame(sc.n_symbols, sc.order, derive_seed(run_seed, kFrameTag, k, p, s));
      }
    }
    TwoSidedTx tx_x = build_two_sided(f[0][0], f[0][1], pulse, tx_cfg, fs);
    TwoSidedTx tx_y = build_two_sided(f[1][0], f[1][1], pulse, tx_cfg, fs);
    const double scale = std::sqrt(p_ch / (tx_x.field.mean_power() + tx_y.field.mean_power()));
    channels.push_back(scaled(polmux(tx_x.field, tx_y.field), scale));
    if (k == centre) {
      for (int p = 0; p < 2; ++p)
        for (int s = 0; s < 2; ++s) frames[p][s] = f[p][s];
      scale_centre = scale;
      centre_tx = DualPolTx{std::move(tx_x), std::move(tx_y)};
    }
  }
  const DualPolSignal launched = sc.n_wdm == 1 ? channels.front() : wdm_mux(channels, sc.spacing_hz);
  const DualPolSignal propagated = propagate_link(launched, sc, 0.0, false);
  const DualPolSignal received =
      to_rate(random_pol_rotation(propagated, derive_seed(run_seed, kPolTag)).first, rx_rate);

  const InterleaverPair il = sc.interleavers();
  // refs[s][p]
  Samples refs[2][2];
  for (int p = 0; p < 2; ++p) {
    const TwoSidedTx& t = p == 0 ? centre_tx->x : centre_tx->y;
    refs[0][p] = sideband_reference(scaled(t.lower, scale_centre), il.lower, lane_rate);
    refs[1][p] = sideband_reference(scaled(t.upper, scale_centre), il.upper, lane_rate);
  }
  const Index n_train = 2 * sc.training_symbols;

  const std::vector<double> osnrs = osnr_points(sc);
  for (std::size_t oi = 0; oi < osnrs.size(); ++oi) {
    const DualPolSignal noisy = load_noise_to_osnr(received, noise_at(sc, osnrs[oi]), p_ch,
                                                   derive_seed(run_seed, kNoiseTag, oi));
    const auto branches_x = deinterleave(noisy.x(), il);
    const auto branches_y = deinterleave(noisy.y(), il);
    for (std::size_t ri = 0; ri < sc.bias_or_lo_ratio.size(); ++ri) {
      // P_s is the zero-mean signal power of one polarization (both sidebands).
      const double lo_amp = std::sqrt(sc.bias_or_lo_ratio[ri] * p_ch / 2.0);
      for (int s = 0; s < 2; ++s) {
        const bool lower = s == 0;
        const TsKkBranch bx = receive_branch(lower ? branches_x.first : branches_x.second, lower,
                                             lo_amp, sc, total_cd, wl);
        const TsKkBranch by = receive_branch(lower ? branches_y.first : branches_y.second, lower,
                                             lo_amp, sc, total_cd, wl);
        const PolDemuxResult demux = polmux_demux(bx.field, by.field, refs[s][0], refs[s][1], n_train);
        const Sideband side = lower ? Sideband::Lower : Sideband::Upper;
        const RowSide row_side = lower ? RowSide::Lower : RowSide::Upper;
        for (int p = 0; p < 2; ++p) {
          const ComplexSignal& pol_field = p == 0 ? demux.x : demux.y;
          const ComplexSignal lane =
              extract_real_lane(pol_field, 0.0, sc.gap_hz, side, pulse.half_bandwidth_hz());
          BerReport report = decide_and_count(lane, frames[p][s], pulse);
          const TsKkBranch& b = p == 0 ? bx : by;
          report.clip_count = b.clips;
          report.min_phase_violations = b.violation ? 1 : 0;
          counts[RowKey{oi, ri, RowScheme::TsKk, row_side, p == 0 ? RowPol::X : RowPol::Y}].merge(report);
        }
      }
    }
  }
}

// ------------------------------------------------------ coherent 16-QAM

void run_coherent_job(const LinkScenario& sc, const Job& job, JobCounts& counts) {
  const double fs = sc.sample_rate_hz();
  const PulseShape pulse = sc.pulse();
  const double p_ch = launch_power_w(sc);
  const double wl = sc.spans.front().reference_wavelength_nm;
  const double total_cd = sc.total_dispersion_ps_nm();
  const double rx_rate = rx_grid_rate(sc);
  const double lane_rate = sc.kk.output_rate_hz;
  const int centre = sc.n_wdm / 2;
  const std::uint64_t run_seed = sc.base_seed + static_cast<std::uint64_t>(job.run);
  constexpr std::uint64_t kQamOffset = 16;

  // frames[pol][0] = in-phase, frames[pol][1] = quadrature
  SymbolFrame frames[2][2];
  Samples refs[2];
  std::vector<DualPolSignal> channels;
  for (int k = 0; k < sc.n_wdm; ++k) {
    SymbolFrame f[2][2];
    ComplexSignal fields[2] = {ComplexSignal::zeros(2, fs), ComplexSignal::zeros(2, fs)};
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        f[p][q] = make_frame(sc.n_symbols, sc.order,
                             derive_seed(run_seed, kFrameTag, k + kQamOffset, p, q));
      }
      const Samples symbols =
          (f[p][0].levels.cast<Complex>() + Complex(0.0, 1.0) * f[p][1].levels.cast<Complex>()) /
          std::sqrt(2.0);
      fields[p] = shape(symbols, pulse, fs);
    }
    const double scale = std::sqrt(p_ch / (fields[0].mean_power() + fields[1].mean_power()));
    channels.push_back(scaled(polmux(fields[0], fields[1]), scale));
    if (k == centre) {
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) frames[p][q] = f[p][q];
        refs[p] = decimate_to_rate(scaled(fields[p], scale), lane_rate).samples();
      }
    }
  }
  const DualPolSignal launched = sc.n_wdm == 1 ? channels.front() : wdm_mux(channels, sc.spacing_hz);
  const DualPolSignal propagated = propagate_link(launched, sc, 0.0, false);
  const DualPolSignal received =
      to_rate(random_pol_rotation(propagated, derive_seed(run_seed, kPolTag)).first, rx_rate);
  const Index n_train = 2 * sc.training_symbols;

  const std::vector<double> osnrs = osnr_points(sc);
  for (std::size_t oi = 0; oi < osnrs.size(); ++oi) {
    const DualPolSignal noisy = load_noise_to_osnr(received, noise_at(sc, osnrs[oi]), p_ch,
                                                   derive_seed(run_seed, kNoiseTag, oi + kQamOffset));
    const ComplexSignal rx_x = cd_compensate(decimate_to_rate(noisy.x(), lane_rate), total_cd, wl);
    const ComplexSignal rx_y = cd_compensate(decimate_to_rate(noisy.y(), lane_rate), total_cd, wl);
    const PolDemuxResult demux = polmux_demux(rx_x, rx_y, refs[0], refs[1], n_train);
    for (int p = 0; p < 2; ++p) {
      const ComplexSignal& field = p == 0 ? demux.x : demux.y;
      BerReport report = decide_and_count(field, frames[p][0], pulse);
      report.merge(decide_and_count(field.with_samples(field.samples() * Complex(0.0, -1.0)),
                                    frames[p][1], pulse));
      counts[RowKey{oi, 0, RowScheme::Coherent, RowSide::Full, p == 0 ? RowPol::X : RowPol::Y}]
          .merge(report);
    }
  }
}

std::vector<Job> one_job_per_run(const LinkScenario& sc) {
  std::vector<Job> jobs;
  for (int run = 0; run < sc.n_runs; ++run) jobs.push_back(Job{run, 0});
  return jobs;
}

}  // namespace

SweepResult run_kkpam_linear(const LinkScenario& sc, const RunOptions& opts) {
  if (sc.scheme != SchemeKind::KkPamSsb || sc.axis != SweepAxis::Osnr) {
    throw ConfigError("run_kkpam_linear needs a KK-PAM scenario swept over OSNR");
  }
  return run_kkpam(sc, opts);
}

SweepResult run_kkpam_cd_sweep(const LinkScenario& sc, const RunOptions& opts) {
  if (sc.scheme != SchemeKind::KkPamSsb || sc.axis != SweepAxis::Cd) {
    throw ConfigError("run_kkpam_cd_sweep needs a KK-PAM scenario swept over dispersion");
  }
  return run_kkpam(sc, opts);
}

SweepResult run_kkpam_wdm_nonlinear(const LinkScenario& sc, const RunOptions& opts) {
  if (sc.scheme != SchemeKind::KkPamSsb || sc.axis != SweepAxis::Osnr ||
      sc.link_model != LinkModel::Manakov) {
    throw ConfigError("run_kkpam_wdm_nonlinear needs a KK-PAM OSNR sweep over a Manakov link");
  }
  return run_kkpam(sc, opts);
}

SweepResult run_tskk(const LinkScenario& sc, const RunOptions& opts) {
  if (sc.scheme != SchemeKind::TwoSidedPolMux) throw ConfigError("run_tskk needs the TS-KK scheme");
  sc.validate();
  const auto start = std::chrono::steady_clock::now();
  auto body = [&](const Job& job) {
    JobCounts counts;
    run_tskk_job(sc, job, counts);
    if (sc.coherent_baseline) run_coherent_job(sc, job, counts);
    return counts;
  };
  SweepResult out = assemble(sc, run_jobs(one_job_per_run(sc), opts.jobs, body, opts), sc.bias_or_lo_ratio);
  add_theory(out, sc, "theory-4pam", 4, BerKind::PamCoherent, 2);
  if (sc.coherent_baseline) add_theory(out, sc, "theory-16qam", 16, BerKind::QamCoherent, 1);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SweepResult run_coherent16qam_baseline(const LinkScenario& sc, const RunOptions& opts) {
  if (sc.scheme != SchemeKind::CoherentQam16 && sc.scheme != SchemeKind::TwoSidedPolMux) {
    throw ConfigError("the coherent baseline needs a dual-polarization scenario");
  }
  sc.validate();
  const auto start = std::chrono::steady_clock::now();
  auto body = [&](const Job& job) {
    JobCounts counts;
    run_coherent_job(sc, job, counts);
    return counts;
  };
  SweepResult out = assemble(sc, run_jobs(one_job_per_run(sc), opts.jobs, body, opts), sc.bias_or_lo_ratio);
  add_theory(out, sc, "theory-16qam", 16, BerKind::QamCoherent, 1);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SweepResult run_scenario(const LinkScenario& sc, const RunOptions& opts) {
  if (sc.axis_values().empty()) {
    // Nothing to simulate; the result still carries the axis for emission.
    SweepResult empty;
    empty.scenario_name = sc.name;
    empty.axis_name = sc.axis_name();
    return empty;
  }
  switch (sc.scheme) {
    case SchemeKind::KkPamSsb:
      return run_kkpam(sc, opts);
    case SchemeKind::TwoSidedPolMux:
      return run_tskk(sc, opts);
    case SchemeKind::CoherentQam16:
      return run_coherent16qam_baseline(sc, opts);
  }
  throw ConfigError("unknown scheme");
}

}  // namespace kktx
