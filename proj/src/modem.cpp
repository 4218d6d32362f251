#include "kktx/modem.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "kktx/errors.hpp"

namespace kktx {

int gray_decode(int code) {
  int index = 0;
  for (; code != 0; code >>= 1) index ^= code;
  return index;
}

RealVector pam_levels(int order) {
  RealVector levels(order);
  const double norm = std::sqrt((static_cast<double>(order) * order - 1.0) / 3.0);
  for (int i = 0; i < order; ++i) levels[i] = (2.0 * i - (order - 1)) / norm;
  return levels;
}

int SymbolFrame::bits_per_symbol() const { return std::countr_zero(static_cast<unsigned>(order)); }

std::vector<std::uint8_t> SymbolFrame::label(int symbol_index) const {
  const int k = bits_per_symbol();
  const int code = gray_encode(symbol_index);
  std::vector<std::uint8_t> out(k);
  for (int b = 0; b < k; ++b) out[b] = static_cast<std::uint8_t>((code >> (k - 1 - b)) & 1);
  return out;
}

namespace {

void check_order(int order) {
  if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order))) {
    throw ContractError("modulation order must be a power of two >= 2, got " +
                        std::to_string(order));
  }
}

}  // namespace

SymbolFrame frame_from_symbols(std::vector<int> symbols, int order) {
  check_order(order);
  SymbolFrame frame;
  frame.order = order;
  const RealVector table = pam_levels(order);
  frame.levels.resize(static_cast<Index>(symbols.size()));
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] < 0 || symbols[i] >= order) throw ContractError("symbol index out of range");
    frame.levels[static_cast<Index>(i)] = table[symbols[i]];
  }
  frame.symbols = std::move(symbols);
  for (int s : frame.symbols) {
    const auto bits = frame.label(s);
    frame.bits.insert(frame.bits.end(), bits.begin(), bits.end());
  }
  return frame;
}

SymbolFrame make_frame(Index n_symbols, int order, std::uint64_t seed) {
  check_order(order);
  if (n_symbols < 1) throw ContractError("a frame needs at least one symbol");
  // Raw engine output only: identical on every standard library.
  std::mt19937_64 rng(seed);
  const int k = std::countr_zero(static_cast<unsigned>(order));
  std::vector<int> symbols(static_cast<std::size_t>(n_symbols));
  std::uint64_t word = 0;
  int left = 0;
  for (auto& s : symbols) {
    int code = 0;
    for (int b = 0; b < k; ++b) {
      if (left == 0) {
        word = rng();
        left = 64;
      }
      code = (code << 1) | static_cast<int>(word & 1u);
      word >>= 1;
      --left;
    }
    s = gray_decode(code);
  }
  return frame_from_symbols(std::move(symbols), order);
}

double PulseShape::spectrum(double f_hz) const {
  const double t = 1.0 / symbol_rate_hz;
  const double af = std::abs(f_hz);
  const double f1 = 0.5 * (1.0 - rolloff) * symbol_rate_hz;
  const double f2 = 0.5 * (1.0 + rolloff) * symbol_rate_hz;
  double h = 0.0;
  if (af <= f1) {
    h = 1.0;
  } else if (af <= f2) {
    h = 0.5 * (1.0 + std::cos(kPi * t / rolloff * (af - f1)));
  }
  return h / std::sqrt(1.0 - 0.25 * rolloff);
}

void PulseShape::validate() const {
  if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ContractError("roll-off must lie in [0, 1]");
  if (!(symbol_rate_hz > 0.0)) throw ContractError("symbol rate must be positive");
}

namespace detail {

ComplexSignal shape_symbols(const Samples& symbols, const PulseShape& pulse,
                            double sample_rate_hz, bool real_valued) {
  pulse.validate();
  if (sample_rate_hz < (1.0 + pulse.rolloff) * pulse.symbol_rate_hz) {
    throw ContractError("sample rate below the occupied bandwidth of the pulse");
  }
  const Index n_sym = symbols.size();
  const double exact = static_cast<double>(n_sym) * sample_rate_hz / pulse.symbol_rate_hz;
  const Index n_out = static_cast<Index>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(n_out)) > 1e-6 * std::max(1.0, exact)) {
    throw ContractError("sample rate and symbol rate are incommensurate for this frame");
  }
  const Samples sym_spec = fft::forward(symbols);
  const RealVector f = frequency_grid(n_out, sample_rate_hz);
  const double df = sample_rate_hz / static_cast<double>(n_out);
  const double scale = static_cast<double>(n_out) / static_cast<double>(n_sym);
  Samples out_spec = Samples::Zero(n_out);
  for (Index k = 0; k < n_out; ++k) {
    const double g = pulse.spectrum(f[k]);
    if (g == 0.0) continue;
    const Index bin = static_cast<Index>(std::llround(f[k] / df));
    const Index m = ((bin % n_sym) + n_sym) % n_sym;
    out_spec[k] = scale * g * sym_spec[m];
  }
  Samples time = fft::inverse(out_spec);
  if (real_valued) time = time.real().cast<Complex>();
  return ComplexSignal(std::move(time), sample_rate_hz);
}

}  // namespace detail

InterleaverPair TxConfig::interleavers() const {
  if (!interleaver) throw ContractError("no interleaver configured");
  return make_interleavers(interleaver->order, interleaver->bw3db_hz, interleaver_offset_hz);
}

KkPamTx build_kkpam(const SymbolFrame& frame, const PulseShape& pulse, const TxConfig& cfg,
                    double sample_rate_hz) {
  if (cfg.scheme != Scheme::KkPamSsb) throw ContractError("build_kkpam needs the KK-PAM scheme");
  if (!(cfg.bias_power_ratio > 0.0)) throw ContractError("bias power ratio must be positive");
  const ComplexSignal ssb = analytic(shape(frame, pulse, sample_rate_hz));
  const double ps = ssb.mean_power();
  const double bias = std::sqrt(cfg.bias_power_ratio * ps);
  Samples field = ssb.samples();
  field.array() += bias;
  return KkPamTx{ssb.with_samples(std::move(field)), bias, ps};
}

namespace {

// One half of a real signal's spectrum, pushed away from DC by `shift_bins`.
// The DC bin is shared equally between the two halves.
Samples shifted_half(const Samples& spec, Index shift_bins, bool upper) {
  const Index n = spec.size();
  Samples out = Samples::Zero(n);
  if (upper) {
    for (Index k = 1; k < n / 2; ++k) out[(k + shift_bins) % n] = spec[k];
  } else {
    for (Index k = n / 2 + 1; k < n; ++k) out[(k - shift_bins + n) % n] = spec[k];
  }
  out[(upper ? shift_bins : n - shift_bins) % n] += 0.5 * spec[0];
  return out;
}

}  // namespace

TwoSidedTx build_two_sided(const SymbolFrame& frame_lo, const SymbolFrame& frame_hi,
                           const PulseShape& pulse, const TxConfig& cfg, double sample_rate_hz) {
  if (cfg.scheme != Scheme::TwoSided) throw ContractError("build_two_sided needs the TS scheme");
  if (!(cfg.gap_hz >= 0.0)) throw ContractError("guard band must be non-negative");
  if ((1.0 + pulse.rolloff) * pulse.symbol_rate_hz + cfg.gap_hz > cfg.grid_spacing_hz) {
    throw ContractError("guard band plus signal bandwidth exceeds the channel grid spacing");
  }
  const ComplexSignal lo = shape(frame_lo, pulse, sample_rate_hz);
  const ComplexSignal hi = shape(frame_hi, pulse, sample_rate_hz);
  if ((1.0 + pulse.rolloff) * pulse.symbol_rate_hz + cfg.gap_hz >= sample_rate_hz) {
    throw AliasingError("two-sided signal does not fit the simulated band", 1.0);
  }
  const Index shift = static_cast<Index>(std::llround(0.5 * cfg.gap_hz / lo.bin_hz()));

  Samples upper = shifted_half(fft::forward(hi.samples()), shift, true);
  Samples lower = shifted_half(fft::forward(lo.samples()), shift, false);
  if (cfg.interleaver) {
    const InterleaverPair il = cfg.interleavers();
    const RealVector f = frequency_grid(lo.size(), sample_rate_hz);
    for (Index k = 0; k < f.size(); ++k) {
      upper[k] *= il.upper.magnitude(f[k]);
      lower[k] *= il.lower.magnitude(f[k]);
    }
  }
  ComplexSignal up = lo.with_samples(fft::inverse(upper));
  ComplexSignal down = lo.with_samples(fft::inverse(lower));
  ComplexSignal field = lo.with_samples(up.samples() + down.samples());
  return TwoSidedTx{std::move(field), std::move(down), std::move(up)};
}

TwoSidedBandwidth two_sided_bandwidth(const PulseShape& pulse, double gap_hz) {
  TwoSidedBandwidth bw;
  bw.nominal_hz = pulse.symbol_rate_hz + gap_hz;
  bw.rolloff_inclusive_hz = (1.0 + pulse.rolloff) * pulse.symbol_rate_hz + gap_hz;
  bw.efficiency_loss = gap_hz / bw.nominal_hz;
  return bw;
}

DualPolSignal polmux(const ComplexSignal& x_field, const ComplexSignal& y_field) {
  return DualPolSignal(x_field, y_field);
}

DualPolSignal wdm_mux(const std::vector<DualPolSignal>& channels, double spacing_hz) {
  if (channels.empty()) throw ContractError("wdm_mux needs at least one channel");
  const auto& first = channels.front();
  const double fs = first.sample_rate_hz();
  const double n = static_cast<double>(channels.size());
  if (channels.size() > 1 && n * std::abs(spacing_hz) > fs) {
    throw AliasingError("WDM comb exceeds the simulated band", 1.0);
  }
  Samples x = Samples::Zero(first.size());
  Samples y = Samples::Zero(first.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const auto& ch = channels[k];
    if (!ch.x().same_grid(first.x())) throw ContractError("WDM channels must share one grid");
    const double offset =
        snap_to_bin((static_cast<double>(k) - 0.5 * (n - 1.0)) * spacing_hz, first.x());
    x += frequency_shift(ch.x(), offset).samples();
    y += frequency_shift(ch.y(), offset).samples();
  }
  return DualPolSignal(first.x().with_samples(std::move(x)), first.y().with_samples(std::move(y)));
}

}  // namespace kktx
