#include "kktx/receiver.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "kktx/channel.hpp"
#include "kktx/errors.hpp"

namespace kktx {

void KkConfig::validate() const {
  if (!(adc_rate_hz > 0.0)) throw ConfigError("ADC rate must be positive");
  if (upsample_factor != 2 && upsample_factor != 3 && upsample_factor != 4 &&
      upsample_factor != 6) {
    throw ConfigError("upsample factor must be one of 2, 3, 4, 6");
  }
  if (!(log_floor_rel > 0.0 && log_floor_rel < 1.0)) {
    throw ConfigError("log floor must lie in (0, 1)");
  }
  if (!(lo_power_ratio >= 0.0)) throw ConfigError("LO power ratio must be non-negative");
  if (!(output_rate_hz > 0.0)) throw ConfigError("output rate must be positive");
}

ComplexSignal add_lo(const ComplexSignal& x, double lo_amp) {
  if (lo_amp == 0.0) return x;
  Samples s = x.samples();
  s.array() += lo_amp;
  return x.with_samples(std::move(s));
}

ComplexSignal photodetect(const ComplexSignal& x) {
  return ComplexSignal::from_real(x.samples().cwiseAbs2(), x.sample_rate_hz(),
                                  x.center_freq_hz());
}

ComplexSignal adc(const ComplexSignal& current, double rate_hz) {
  if (rate_hz > current.sample_rate_hz()) {
    throw ContractError("ADC rate exceeds the simulation rate");
  }
  if (rate_hz == current.sample_rate_hz()) return current;
  const ComplexSignal sampled = decimate_to_rate(current, rate_hz);
  if (!current.is_real()) return sampled;
  return ComplexSignal::from_real(sampled.real(), sampled.sample_rate_hz(),
                                  sampled.center_freq_hz());
}

KkResult kk_reconstruct(const ComplexSignal& current, const KkConfig& cfg) {
  cfg.validate();
  ComplexSignal up = resample(current, Ratio{cfg.upsample_factor, 1});
  RealVector intensity = up.real();
  const double peak = intensity.maxCoeff();
  if (!(peak > 0.0)) throw ContractError("photocurrent has no positive samples");
  const double floor = cfg.log_floor_rel * peak;
  Index clipped = 0;
  for (Index k = 0; k < intensity.size(); ++k) {
    if (intensity[k] < floor) {
      intensity[k] = floor;
      ++clipped;
    }
  }
  const RealVector log_i = intensity.array().log();
  const RealVector phase =
      0.5 * hilbert(ComplexSignal::from_real(log_i, up.sample_rate_hz())).real();
  Samples field(intensity.size());
  for (Index k = 0; k < field.size(); ++k) {
    field[k] = std::polar(std::sqrt(intensity[k]), phase[k]);
  }
  ComplexSignal out = decimate_to_rate(up.with_samples(std::move(field)), cfg.output_rate_hz);
  const bool warn = static_cast<double>(clipped) > 1e-3 * static_cast<double>(intensity.size());
  return KkResult{std::move(out), clipped, warn};
}

ComplexSignal cd_compensate(const ComplexSignal& x, double total_ps_nm, double wavelength_nm) {
  return apply_cd(x, -total_ps_nm, wavelength_nm);
}

ComplexSignal remove_constant_phase(const ComplexSignal& x) {
  const Complex m = x.samples().mean();
  const double rms = std::sqrt(x.mean_power());
  if (!(std::abs(m) >= 1e-9 * rms) || std::abs(m) == 0.0) {
    throw ContractError("no DC pilot present; constant phase is undefined");
  }
  const Complex rot = std::conj(m) / std::abs(m);
  return x.with_samples(x.samples() * rot);
}

ComplexSignal extract_real_lane(const ComplexSignal& x, double bias_amp, double gap_hz,
                                Sideband side, double lane_bw_hz) {
  Samples s = x.samples();
  s.array() -= bias_amp;
  ComplexSignal lane = x.with_samples(std::move(s));
  const double edge = snap_to_bin(0.5 * gap_hz, lane);
  const bool upper = side == Sideband::Upper;
  if (edge != 0.0) lane = frequency_shift(lane, upper ? -edge : edge);
  lane = apply_transfer(lane, [&](double f) {
    const bool keep = upper ? (f >= 0.0 && f <= lane_bw_hz) : (f <= 0.0 && f >= -lane_bw_hz);
    return keep ? 1.0 : 0.0;
  });
  return ComplexSignal::from_real(lane.real(), lane.sample_rate_hz(), lane.center_freq_hz());
}

PolDemuxResult polmux_demux(const ComplexSignal& rx_x, const ComplexSignal& rx_y,
                            const Samples& ref_x, const Samples& ref_y, Index n_training) {
  if (!rx_x.same_grid(rx_y)) throw ContractError("received tributaries must share one grid");
  if (n_training < 2 || n_training > rx_x.size() || n_training > ref_x.size() ||
      n_training > ref_y.size()) {
    throw ContractError("training length exceeds the available samples");
  }
  Eigen::MatrixXcd r(2, n_training);
  Eigen::MatrixXcd s(2, n_training);
  r.row(0) = rx_x.samples().head(n_training).transpose();
  r.row(1) = rx_y.samples().head(n_training).transpose();
  s.row(0) = ref_x.head(n_training).transpose();
  s.row(1) = ref_y.head(n_training).transpose();
  const Eigen::Matrix2cd rr = r * r.adjoint();
  const Eigen::Matrix2cd w = (s * r.adjoint()) * rr.inverse();
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(w);
  const auto& sv = svd.singularValues();
  const double cond = sv[1] > 0.0 ? sv[0] / sv[1] : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e3)) {
    throw ContractError("polarization demultiplexer estimate is ill-conditioned (condition " +
                        std::to_string(cond) + ")");
  }
  Samples ox = w(0, 0) * rx_x.samples() + w(0, 1) * rx_y.samples();
  Samples oy = w(1, 0) * rx_x.samples() + w(1, 1) * rx_y.samples();
  return PolDemuxResult{rx_x.with_samples(std::move(ox)), rx_y.with_samples(std::move(oy)), w};
}

double crosstalk_db(const Eigen::Matrix2cd& combined) {
  const double wanted = std::norm(combined(0, 0)) + std::norm(combined(1, 1));
  const double unwanted = std::norm(combined(0, 1)) + std::norm(combined(1, 0));
  if (unwanted == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(unwanted / wanted);
}

void BerReport::merge(const BerReport& other) {
  n_bits += other.n_bits;
  n_errors += other.n_errors;
  ber = n_bits > 0 ? static_cast<double>(n_errors) / static_cast<double>(n_bits) : 0.0;
  min_phase_violations += other.min_phase_violations;
  clip_count += other.clip_count;
  per_pol_ber.reset();
  reconstruction_rms.reset();
}

BerReport count_symbol_errors(const RealVector& samples, const SymbolFrame& frame) {
  if (samples.size() != frame.size()) {
    throw ContractError("sample count does not match the frame length");
  }
  const RealVector table = pam_levels(frame.order);
  RealVector ref(frame.size());
  for (Index k = 0; k < frame.size(); ++k) ref[k] = table[frame.symbols[static_cast<std::size_t>(k)]];
  const double denom = ref.squaredNorm();
  const double gain = denom > 0.0 ? samples.dot(ref) / denom : 1.0;
  const double scale = gain != 0.0 ? 1.0 / gain : 1.0;

  BerReport report;
  const int bits = frame.bits_per_symbol();
  for (Index k = 0; k < frame.size(); ++k) {
    const double v = samples[k] * scale;
    int best = 0;
    double best_d = std::abs(v - table[0]);
    for (int m = 1; m < frame.order; ++m) {
      const double d = std::abs(v - table[m]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    const int truth = frame.symbols[static_cast<std::size_t>(k)];
    report.n_errors += std::popcount(static_cast<unsigned>(gray_encode(best) ^ gray_encode(truth)));
  }
  report.n_bits = static_cast<long long>(frame.size()) * bits;
  report.ber = static_cast<double>(report.n_errors) / static_cast<double>(report.n_bits);
  return report;
}

BerReport decide_and_count(const ComplexSignal& lane, const SymbolFrame& frame,
                           const PulseShape& pulse) {
  pulse.validate();
  const double ratio = lane.sample_rate_hz() / pulse.symbol_rate_hz;
  const Index sps = static_cast<Index>(std::llround(ratio));
  if (sps < 1 || std::abs(ratio - static_cast<double>(sps)) > 1e-9) {
    throw ContractError("lane rate must be an integer multiple of the symbol rate");
  }
  if (lane.size() != sps * frame.size()) {
    throw ContractError("lane length does not match the frame length");
  }
  const ComplexSignal filtered = lowpass(lane, pulse.half_bandwidth_hz());
  RealVector samples(frame.size());
  for (Index k = 0; k < frame.size(); ++k) samples[k] = filtered.samples()[k * sps].real();
  return count_symbol_errors(samples, frame);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double analytic_ber(int order, double snr_per_symbol, BerKind kind) {
  if (!(snr_per_symbol > 0.0)) throw ContractError("SNR must be positive");
  if (kind == BerKind::QamCoherent) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order || side < 2) throw ContractError("QAM order must be a square");
    return analytic_ber(side, 0.5 * snr_per_symbol, BerKind::PamCoherent);
  }
  if (order < 2) throw ContractError("PAM order must be >= 2");
  const double m = static_cast<double>(order);
  return 2.0 * (m - 1.0) / (m * std::log2(m)) * q_function(std::sqrt(6.0 * snr_per_symbol / (m * m - 1.0)));
}

double osnr_to_snr(double osnr_db, double ref_bw_hz, double symbol_rate_hz, int n_sidebands) {
  if (n_sidebands < 1) throw ContractError("at least one sideband is required");
  return std::pow(10.0, osnr_db / 10.0) * ref_bw_hz / (n_sidebands * symbol_rate_hz);
}

}  // namespace kktx
