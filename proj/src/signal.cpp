#include "kktx/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kktx/errors.hpp"

namespace kktx {

ComplexSignal::ComplexSignal(Samples samples, double sample_rate_hz, double center_freq_hz)
    : samples_(std::move(samples)),
      sample_rate_hz_(sample_rate_hz),
      center_freq_hz_(center_freq_hz) {
  if (samples_.size() < 2 || samples_.size() % 2 != 0) {
    throw ContractError("signal length must be even and >= 2, got " +
                        std::to_string(samples_.size()));
  }
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw ContractError("sample rate must be positive and finite");
  }
  if (!std::isfinite(center_freq_hz_)) throw ContractError("center frequency must be finite");
  if (!samples_.allFinite()) throw ContractError("signal contains NaN or Inf samples");
}

ComplexSignal ComplexSignal::zeros(Index n, double sample_rate_hz, double center_freq_hz) {
  return ComplexSignal(Samples::Zero(n), sample_rate_hz, center_freq_hz);
}

ComplexSignal ComplexSignal::from_real(const RealVector& values, double sample_rate_hz,
                                       double center_freq_hz) {
  return ComplexSignal(values.cast<Complex>(), sample_rate_hz, center_freq_hz);
}

bool ComplexSignal::is_real() const { return (samples_.imag().array() == 0.0).all(); }

bool ComplexSignal::same_grid(const ComplexSignal& other) const {
  return size() == other.size() && sample_rate_hz_ == other.sample_rate_hz_ &&
         center_freq_hz_ == other.center_freq_hz_;
}

ComplexSignal ComplexSignal::with_samples(Samples samples) const {
  return ComplexSignal(std::move(samples), sample_rate_hz_, center_freq_hz_);
}

DualPolSignal::DualPolSignal(ComplexSignal x, ComplexSignal y) : x_(std::move(x)), y_(std::move(y)) {
  if (!x_.same_grid(y_)) {
    throw ContractError("x and y polarizations must share length, rate and center frequency");
  }
}

double FilterSpec::exponent() const {
  return semantics == OrderSemantics::HalfExponent ? 2.0 * order : static_cast<double>(order);
}

double FilterSpec::magnitude(double f_hz) const {
  const double x = std::abs(2.0 * (f_hz - center_hz) / bw3db_hz);
  return std::exp(-0.5 * std::log(2.0) * std::pow(x, exponent()));
}

void FilterSpec::validate() const {
  if (order < 1) throw ConfigError("filter order must be a positive integer");
  if (!(bw3db_hz > 0.0)) throw ConfigError("filter 3-dB bandwidth must be positive");
}

InterleaverPair make_interleavers(int order, double bw3db_hz, double offset_hz) {
  InterleaverPair pair;
  pair.lower = FilterSpec{FilterShape::SuperGaussian, order, -std::abs(offset_hz), bw3db_hz};
  pair.upper = FilterSpec{FilterShape::SuperGaussian, order, std::abs(offset_hz), bw3db_hz};
  return pair;
}

RealVector frequency_grid(Index n, double sample_rate_hz) {
  RealVector f(n);
  const double df = sample_rate_hz / static_cast<double>(n);
  for (Index k = 0; k < n; ++k) {
    f[k] = static_cast<double>(k < n / 2 ? k : k - n) * df;
  }
  // The Nyquist bin is reported as +fs/2.
  f[n / 2] = 0.5 * sample_rate_hz;
  return f;
}

ComplexSignal hilbert(const ComplexSignal& x) {
  if (!x.is_real()) throw ContractError("hilbert() requires a real-valued signal");
  const Index n = x.size();
  Samples spec = fft::forward(x.samples());
  spec[0] = 0.0;
  spec[n / 2] = 0.0;
  for (Index k = 1; k < n / 2; ++k) spec[k] *= Complex(0.0, -1.0);
  for (Index k = n / 2 + 1; k < n; ++k) spec[k] *= Complex(0.0, 1.0);
  return ComplexSignal::from_real(fft::inverse(spec).real(), x.sample_rate_hz(),
                                  x.center_freq_hz());
}

ComplexSignal analytic(const ComplexSignal& x) {
  const RealVector h = hilbert(x).real();
  Samples out(x.size());
  out.real() = x.samples().real();
  out.imag() = h;
  return x.with_samples(std::move(out));
}

ComplexSignal frequency_shift(const ComplexSignal& x, double df_hz) {
  if (!(std::abs(df_hz) < 0.5 * x.sample_rate_hz())) {
    std::ostringstream msg;
    msg << "frequency shift of " << df_hz << " Hz exceeds the representable band +/-"
        << 0.5 * x.sample_rate_hz() << " Hz";
    throw AliasingError(msg.str(), 1.0);
  }
  if (df_hz == 0.0) return x;
  const double cycles_per_sample = df_hz / x.sample_rate_hz();
  Samples out(x.size());
  for (Index n = 0; n < x.size(); ++n) {
    double turns = cycles_per_sample * static_cast<double>(n);
    turns -= std::floor(turns);
    out[n] = x.samples()[n] * std::polar(1.0, 2.0 * kPi * turns);
  }
  return x.with_samples(std::move(out));
}

double snap_to_bin(double df_hz, const ComplexSignal& grid) {
  return std::round(df_hz / grid.bin_hz()) * grid.bin_hz();
}

namespace {

enum class Truncation { Strict, Discard };

ComplexSignal resample_to_length(const ComplexSignal& x, Index m, double new_rate,
                                 Truncation policy) {
  const Index n = x.size();
  if (m == n) return x;
  if (m < 2 || m % 2 != 0) {
    throw ContractError("resampled length must be even and >= 2, got " + std::to_string(m));
  }
  const Samples spec = fft::forward(x.samples());
  Samples out = Samples::Zero(m);
  if (m > n) {
    for (Index k = 0; k < n / 2; ++k) out[k] = spec[k];
    for (Index k = 1; k < n / 2; ++k) out[m - k] = spec[n - k];
    // Split the old Nyquist bin so real input stays real.
    out[n / 2] += 0.5 * spec[n / 2];
    out[m - n / 2] += 0.5 * spec[n / 2];
  } else {
    double kept = 0.0;
    double total = spec.squaredNorm();
    for (Index k = 0; k < m / 2; ++k) out[k] = spec[k];
    for (Index k = 1; k < m / 2; ++k) out[m - k] = spec[n - k];
    // Content at exactly +/- new Nyquist folds onto the new Nyquist bin.
    out[m / 2] = spec[m / 2] + spec[n - m / 2];
    kept = out.head(m / 2).squaredNorm() + out.tail(m / 2 - 1).squaredNorm() +
           std::norm(spec[m / 2]) + std::norm(spec[n - m / 2]);
    const double aliased = total > 0.0 ? std::max(0.0, (total - kept) / total) : 0.0;
    if (policy == Truncation::Strict && aliased > 1e-6) {
      std::ostringstream msg;
      msg << "downsampling would discard " << aliased << " of the signal energy";
      throw AliasingError(msg.str(), aliased);
    }
  }
  Samples time = fft::inverse(out);
  time *= static_cast<double>(m) / static_cast<double>(n);
  return ComplexSignal(std::move(time), new_rate, x.center_freq_hz());
}

}  // namespace

ComplexSignal resample(const ComplexSignal& x, Ratio factor) {
  if (factor.num <= 0 || factor.den <= 0) throw ContractError("resample factor must be positive");
  const std::int64_t g = std::gcd(factor.num, factor.den);
  const std::int64_t p = factor.num / g;
  const std::int64_t q = factor.den / g;
  if ((x.size() * p) % q != 0) {
    throw ContractError("resample factor does not yield an integer number of samples");
  }
  const Index m = x.size() * p / q;
  return resample_to_length(x, m, x.sample_rate_hz() * static_cast<double>(p) / q,
                            Truncation::Strict);
}

ComplexSignal decimate_to_rate(const ComplexSignal& x, double rate_hz) {
  const double exact = static_cast<double>(x.size()) * rate_hz / x.sample_rate_hz();
  const Index m = static_cast<Index>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(m)) > 1e-6) {
    throw ContractError("target rate is not commensurate with the frame length");
  }
  if (m == x.size()) return x;
  if (m > x.size()) return resample_to_length(x, m, rate_hz, Truncation::Strict);
  return resample_to_length(lowpass(x, 0.5 * rate_hz), m, rate_hz, Truncation::Discard);
}

ComplexSignal lowpass(const ComplexSignal& x, double cutoff_hz) {
  return apply_transfer(x, [cutoff_hz](double f) { return std::abs(f) <= cutoff_hz ? 1.0 : 0.0; });
}

ComplexSignal apply_filter(const ComplexSignal& x, const FilterSpec& filter) {
  filter.validate();
  const double center = x.center_freq_hz();
  return apply_transfer(x, [&](double f) { return filter.magnitude(f + center); });
}

int winding_number(const ComplexSignal& x) {
  const Samples& s = x.samples();
  const double peak = s.cwiseAbs().maxCoeff();
  if (!(peak > 0.0) || s.cwiseAbs().minCoeff() < 1e-15 * peak) {
    throw ContractError("trajectory passes through the origin; winding number undefined");
  }
  double total = 0.0;
  const Index n = s.size();
  for (Index k = 0; k < n; ++k) {
    total += std::arg(s[(k + 1) % n] / s[k]);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

double measure_power(const ComplexSignal& x, std::optional<Band> band) {
  if (!band) return x.mean_power();
  const double nyquist = 0.5 * x.sample_rate_hz();
  if (!(band->hi_hz > band->lo_hz)) throw ContractError("measurement band is empty");
  if (band->lo_hz < -nyquist || band->hi_hz > nyquist) {
    throw ContractError("measurement band exceeds the Nyquist range");
  }
  const Samples spec = fft::forward(x.samples());
  const RealVector f = frequency_grid(x.size(), x.sample_rate_hz());
  double acc = 0.0;
  Index bins = 0;
  for (Index k = 0; k < spec.size(); ++k) {
    if (f[k] >= band->lo_hz && f[k] < band->hi_hz) {
      acc += std::norm(spec[k]);
      ++bins;
    }
  }
  if (bins == 0) throw ContractError("measurement band contains no frequency bins");
  const double n = static_cast<double>(x.size());
  return acc / (n * n);
}

double relative_rms(const Samples& a, const Samples& b) {
  return std::sqrt((a - b).squaredNorm() / b.squaredNorm());
}

}  // namespace kktx
