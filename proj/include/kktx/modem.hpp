#pragma once

// Transmitter side: Gray-coded PAM frames, raised-cosine shaping, and the
// two optical field constructions (biased SSB for KK-PAM, two independent
// sidebands around an empty guard band for TS-KK).

#include <cstdint>
#include <optional>
#include <vector>

#include "kktx/signal.hpp"

namespace kktx {

inline int gray_encode(int index) { return index ^ (index >> 1); }
int gray_decode(int code);

/// Zero-mean, unit-power level table for M-PAM: (2i - (M-1)) / sqrt((M^2-1)/3).
RealVector pam_levels(int order);

/// Ground truth for one lane: bits, symbol indices and their amplitudes.
struct SymbolFrame {
  std::vector<std::uint8_t> bits;
  std::vector<int> symbols;
  RealVector levels;
  int order = 4;

  Index size() const { return static_cast<Index>(symbols.size()); }
  int bits_per_symbol() const;

  /// Bit label of a symbol index, most significant bit first.
  std::vector<std::uint8_t> label(int symbol_index) const;
};

/// Deterministic pseudo-random frame. Throws ContractError unless M is a
/// power of two >= 2 and n_symbols >= 1.
SymbolFrame make_frame(Index n_symbols, int order, std::uint64_t seed);

/// Builds a frame from explicit symbol indices.
SymbolFrame frame_from_symbols(std::vector<int> symbols, int order);

enum class PulseKind { RaisedCosine };

struct PulseShape {
  PulseKind kind = PulseKind::RaisedCosine;
  double rolloff = 0.05;
  double symbol_rate_hz = 48e9;

  /// Spectrum normalized to a peak of 1 / sqrt(1 - rolloff/4), which makes
  /// the shaped waveform of a unit-power symbol stream unit-power on average.
  double spectrum(double f_hz) const;
  /// Half of the occupied two-sided bandwidth, (1 + rolloff) * baud / 2.
  double half_bandwidth_hz() const { return 0.5 * (1.0 + rolloff) * symbol_rate_hz; }
  void validate() const;
};

namespace detail {
ComplexSignal shape_symbols(const Samples& symbols, const PulseShape& pulse,
                            double sample_rate_hz, bool real_valued);
}

/// Cyclic pulse train sum_k a_k g(t - kT), computed exactly in the frequency
/// domain. Real symbol vectors give real-valued output. Throws ContractError
/// if sample_rate < (1 + rolloff) baud or the rates are incommensurate with
/// the frame length.
template <typename Derived>
ComplexSignal shape(const Eigen::MatrixBase<Derived>& symbols, const PulseShape& pulse,
                    double sample_rate_hz) {
  using Scalar = typename Derived::Scalar;
  return detail::shape_symbols(symbols.template cast<Complex>(), pulse, sample_rate_hz,
                               !Eigen::NumTraits<Scalar>::IsComplex);
}

inline ComplexSignal shape(const SymbolFrame& frame, const PulseShape& pulse,
                           double sample_rate_hz) {
  return shape(frame.levels, pulse, sample_rate_hz);
}

enum class Scheme { KkPamSsb, TwoSided };

struct TxConfig {
  Scheme scheme = Scheme::KkPamSsb;
  /// A^2 / P_s for KK-PAM.
  double bias_power_ratio = 10.0;
  double gap_hz = 0.0;
  double grid_spacing_hz = 80e9;
  /// Interleaver shaping applied to each TS-KK sideband; none means ideal
  /// spectral selection.
  std::optional<FilterSpec> interleaver;
  double interleaver_offset_hz = 18.8e9;

  InterleaverPair interleavers() const;
};

struct KkPamTx {
  ComplexSignal field;
  /// Real bias amplitude A in sqrt(W).
  double bias_amp = 0.0;
  /// P_s, power of the zero-mean SSB component.
  double signal_power_w = 0.0;
};

/// A + analytic(shape(frame)).
KkPamTx build_kkpam(const SymbolFrame& frame, const PulseShape& pulse, const TxConfig& cfg,
                    double sample_rate_hz);

struct TwoSidedTx {
  ComplexSignal field;
  ComplexSignal lower;
  ComplexSignal upper;
};

/// Opens a guard band of cfg.gap_hz around the carrier by pushing each
/// signal's positive half up and negative half down by gap/2, keeps the
/// upper half of `frame_hi` and the lower half of `frame_lo`, and shapes
/// each with its interleaver. No carrier is added.
TwoSidedTx build_two_sided(const SymbolFrame& frame_lo, const SymbolFrame& frame_hi,
                           const PulseShape& pulse, const TxConfig& cfg, double sample_rate_hz);

/// Bandwidth bookkeeping for one TS-KK WDM channel.
struct TwoSidedBandwidth {
  double nominal_hz = 0.0;          ///< baud + gap
  double rolloff_inclusive_hz = 0.0;  ///< (1 + rolloff) baud + gap
  double efficiency_loss = 0.0;     ///< gap / nominal
};
TwoSidedBandwidth two_sided_bandwidth(const PulseShape& pulse, double gap_hz);

DualPolSignal polmux(const ComplexSignal& x_field, const ComplexSignal& y_field);

/// Places channel k at (k - (N-1)/2) * spacing, each offset rounded to a
/// whole number of bins. Throws AliasingError if N * spacing exceeds the
/// simulated band.
DualPolSignal wdm_mux(const std::vector<DualPolSignal>& channels, double spacing_hz);

}  // namespace kktx
