#pragma once

// Direct-detection receiver chain: LO addition, square-law detection, ADC,
// Kramers-Kronig field reconstruction, digital dispersion compensation,
// lane extraction, polarization demultiplexing and BER counting.

#include <optional>
#include <utility>

#include "kktx/modem.hpp"
#include "kktx/signal.hpp"

namespace kktx {

struct KkConfig {
  /// Photocurrent sampling rate. Must cover the detected bandwidth B.
  double adc_rate_hz = 51e9;
  /// Up-sampling applied before the logarithm; one of 2, 3, 4, 6.
  int upsample_factor = 3;
  /// log() clamp relative to the peak intensity.
  double log_floor_rel = 1e-12;
  /// P_LO / P_s for receivers that add their own tone.
  double lo_power_ratio = 10.0;
  /// Rate of the reconstructed field, normally 2 samples per symbol.
  double output_rate_hz = 96e9;

  void validate() const;
};

/// x + lo_amp at every sample (LO at the grid center).
ComplexSignal add_lo(const ComplexSignal& x, double lo_amp);

/// |x|^2, returned as a real-valued signal.
ComplexSignal photodetect(const ComplexSignal& x);

/// Brick-wall anti-alias filter at rate/2, then resampling to `rate_hz`.
/// Throws ContractError if the rate exceeds the input rate.
ComplexSignal adc(const ComplexSignal& current, double rate_hz);

struct KkResult {
  ComplexSignal field;
  /// Number of up-sampled intensity samples that hit the log clamp.
  Index clip_count = 0;
  /// Set when more than 0.1% of the samples were clamped.
  bool clip_warning = false;
};

/// sqrt(I) exp(i H{ln I} / 2) on an up-sampled grid, returned at
/// cfg.output_rate_hz. Equals the minimum-phase field up to a constant phase.
KkResult kk_reconstruct(const ComplexSignal& current, const KkConfig& cfg);

/// Exact inverse of apply_cd with the same accumulated dispersion.
ComplexSignal cd_compensate(const ComplexSignal& x, double total_ps_nm,
                            double wavelength_nm = 1550.0);

/// Rotates x so that its mean (the bias or LO tone) is real and positive.
/// Throws ContractError if the mean is below 1e-9 of the RMS value.
ComplexSignal remove_constant_phase(const ComplexSignal& x);

enum class Sideband { Upper, Lower };

/// Subtracts the real tone `bias_amp` (the known bias, or the measured mean
/// when only the decision matters), moves the sideband edge at +/- gap/2
/// down to DC, keeps only the occupied side [0, lane_bw] (upper) or
/// [-lane_bw, 0] (lower), and returns the real part. The shift is rounded
/// to whole bins.
ComplexSignal extract_real_lane(const ComplexSignal& x, double bias_amp, double gap_hz,
                                Sideband side, double lane_bw_hz);

struct PolDemuxResult {
  ComplexSignal x;
  ComplexSignal y;
  /// Estimated inverse Jones matrix applied to the received pair.
  Eigen::Matrix2cd inverse;
};

/// Least-squares estimate W = S R^H (R R^H)^-1 over the first
/// `n_training` samples, with R the received pair and S the reference pair,
/// applied to the whole frame. Throws ContractError if W's condition number
/// exceeds 1e3.
PolDemuxResult polmux_demux(const ComplexSignal& rx_x, const ComplexSignal& rx_y,
                            const Samples& ref_x, const Samples& ref_y, Index n_training);

/// Power of the unwanted tributary relative to the wanted one after W U,
/// in dB. Zero cross-talk returns -inf.
double crosstalk_db(const Eigen::Matrix2cd& combined);

struct BerReport {
  long long n_bits = 0;
  long long n_errors = 0;
  double ber = 0.0;
  std::optional<std::pair<double, double>> per_pol_ber;
  long long min_phase_violations = 0;
  long long clip_count = 0;
  std::optional<double> reconstruction_rms;

  /// Adds counts of another report; per-pol and RMS fields are dropped.
  void merge(const BerReport& other);
};

/// Brick-wall matched filter at (1 + rolloff) baud / 2, symbol-spaced
/// sampling with zero delay, a data-aided least-squares gain, nearest-level
/// decisions and Gray-decoded bit comparison. The lane rate must be an
/// integer multiple of the baud rate.
BerReport decide_and_count(const ComplexSignal& lane, const SymbolFrame& frame,
                           const PulseShape& pulse);

/// Same decision rule applied directly to symbol-spaced samples.
BerReport count_symbol_errors(const RealVector& samples, const SymbolFrame& frame);

double q_function(double x);

enum class BerKind { PamCoherent, QamCoherent };

/// Gray-coded BER approximation at symbol SNR Es/N0 (linear). Square QAM
/// is treated as two sqrt(M)-PAM quadratures sharing the symbol energy.
double analytic_ber(int order, double snr_per_symbol, BerKind kind);

/// Es/N0 of one detected lane, OSNR * ref_bw / (n_sidebands * R_s), where
/// the OSNR noise is counted in the same polarizations as the signal.
double osnr_to_snr(double osnr_db, double ref_bw_hz, double symbol_rate_hz, int n_sidebands);

}  // namespace kktx
