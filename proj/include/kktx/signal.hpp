#pragma once

// Sampled complex-baseband waveforms and the spectral toolbox every other
// module is built on. All transforms treat a signal as one period of a
// periodic sequence: a frame is a single FFT block.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>

#include "kktx/fft.hpp"

namespace kktx {

using Complex = std::complex<double>;
using Samples = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

/// Uniformly sampled complex field. Power of a sample is |x|^2 in watts.
///
/// Invariants (checked on construction): at least two samples, an even
/// count, a positive sample rate, and no NaN/Inf values.
/// `center_freq_hz` records where the grid center sits relative to the
/// transmit laser; shifting content never rewrites it.
class ComplexSignal {
 public:
  ComplexSignal(Samples samples, double sample_rate_hz, double center_freq_hz = 0.0);

  static ComplexSignal zeros(Index n, double sample_rate_hz, double center_freq_hz = 0.0);
  static ComplexSignal from_real(const RealVector& values, double sample_rate_hz,
                                 double center_freq_hz = 0.0);

  const Samples& samples() const { return samples_; }
  Index size() const { return samples_.size(); }
  double sample_rate_hz() const { return sample_rate_hz_; }
  double center_freq_hz() const { return center_freq_hz_; }
  double bin_hz() const { return sample_rate_hz_ / static_cast<double>(size()); }

  bool is_real() const;
  RealVector real() const { return samples_.real(); }
  double mean_power() const { return samples_.squaredNorm() / static_cast<double>(size()); }
  double energy() const { return samples_.squaredNorm() / sample_rate_hz_; }

  bool same_grid(const ComplexSignal& other) const;

  /// New signal on this grid with different content.
  ComplexSignal with_samples(Samples samples) const;

 private:
  Samples samples_;
  double sample_rate_hz_;
  double center_freq_hz_;
};

/// Two polarization tributaries sharing one time base.
class DualPolSignal {
 public:
  DualPolSignal(ComplexSignal x, ComplexSignal y);

  const ComplexSignal& x() const { return x_; }
  const ComplexSignal& y() const { return y_; }
  Index size() const { return x_.size(); }
  double sample_rate_hz() const { return x_.sample_rate_hz(); }
  double mean_power() const { return x_.mean_power() + y_.mean_power(); }

 private:
  ComplexSignal x_;
  ComplexSignal y_;
};

enum class FilterShape { SuperGaussian };

/// How `order` enters the super-Gaussian exponent.
enum class OrderSemantics {
  HalfExponent,   ///< exponent is 2 * order (order 1 is a Gaussian)
  TotalExponent,  ///< exponent is order itself
};

/// Zero-phase optical filter. |H| = exp(-ln2/2 * |2 (f - center) / bw3db|^p),
/// so the power transfer is exactly -3 dB at center +/- bw3db/2.
struct FilterSpec {
  FilterShape shape = FilterShape::SuperGaussian;
  int order = 1;
  double center_hz = 0.0;
  double bw3db_hz = 1.0;
  OrderSemantics semantics = OrderSemantics::HalfExponent;

  double exponent() const;
  double magnitude(double f_hz) const;
  void validate() const;
};

/// Interleaver pair centered on opposite sides of a channel.
struct InterleaverPair {
  FilterSpec lower;
  FilterSpec upper;
};

InterleaverPair make_interleavers(int order, double bw3db_hz, double offset_hz);

/// Positive rational factor num/den.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;
};

/// Closed frequency interval [lo_hz, hi_hz).
struct Band {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

/// Signed bin frequencies in FFT order (0, df, ..., -df).
RealVector frequency_grid(Index n, double sample_rate_hz);

inline Samples spectrum(const ComplexSignal& x) { return fft::forward(x.samples()); }

/// Multiplies the spectrum by `transfer(f)` where f is the bin frequency
/// relative to the grid center.
template <typename Transfer>
ComplexSignal apply_transfer(const ComplexSignal& x, Transfer&& transfer) {
  Samples spec = fft::forward(x.samples());
  const RealVector f = frequency_grid(x.size(), x.sample_rate_hz());
  for (Index k = 0; k < spec.size(); ++k) spec[k] *= transfer(f[k]);
  return x.with_samples(fft::inverse(spec));
}

/// Hilbert transform on the periodic grid, H{cos} = sin. DC and Nyquist
/// bins are zeroed. Throws ContractError for non-real input.
ComplexSignal hilbert(const ComplexSignal& x);

/// x + i H{x}; the real part is the input bit for bit.
ComplexSignal analytic(const ComplexSignal& x);

/// Multiplies by exp(i 2 pi df t). Throws AliasingError if |df| >= fs/2.
ComplexSignal frequency_shift(const ComplexSignal& x, double df_hz);

/// Nearest shift that is a whole number of bins, so that the shifted frame
/// stays periodic.
double snap_to_bin(double df_hz, const ComplexSignal& grid);

/// Band-limited resampling by zero-padding or truncating the spectrum.
/// Throws AliasingError when a downsample would discard more than 1e-6 of
/// the energy.
ComplexSignal resample(const ComplexSignal& x, Ratio factor);

/// Resamples to an absolute rate after a brick-wall anti-alias cut at half
/// the target rate. The resulting length must be an even integer.
ComplexSignal decimate_to_rate(const ComplexSignal& x, double rate_hz);

/// Brick-wall low-pass keeping |f| <= cutoff_hz.
ComplexSignal lowpass(const ComplexSignal& x, double cutoff_hz);

ComplexSignal apply_filter(const ComplexSignal& x, const FilterSpec& filter);

/// Net number of times the trajectory encircles the origin over one frame
/// (the frame is closed periodically). Throws ContractError if the
/// trajectory touches the origin.
int winding_number(const ComplexSignal& x);

/// Mean power, or power inside `band` by Parseval.
double measure_power(const ComplexSignal& x, std::optional<Band> band = std::nullopt);

/// sqrt(mean |a - b|^2 / mean |b|^2).
double relative_rms(const Samples& a, const Samples& b);

}  // namespace kktx
