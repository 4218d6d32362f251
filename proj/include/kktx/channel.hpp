#pragma once

// Fiber and amplifier physics: chromatic dispersion, split-step Manakov
// propagation, ASE noise loading, random polarization rotation and the
// de-interleaving filters used by the two-sided receiver.

#include <cstdint>
#include <utility>
#include <vector>

#include "kktx/signal.hpp"

namespace kktx {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPlanck = 6.62607015e-34;

/// Group-velocity dispersion in s^2 for an accumulated dispersion in ps/nm.
double beta2_total_s2(double total_ps_nm, double wavelength_nm = 1550.0);

struct FiberSpanParams {
  double length_km = 100.0;
  double dispersion_ps_nm_km = 17.0;
  double gamma_per_W_km = 1.3;
  double alpha_db_km = 0.2;
  double reference_wavelength_nm = 1550.0;

  /// beta2 = -D lambda^2 / (2 pi c), in s^2/m.
  double beta2_s2_per_m() const;
  double total_dispersion_ps_nm() const { return dispersion_ps_nm_km * length_km; }
  double gamma_per_W_m() const { return gamma_per_W_km * 1e-3; }
  /// Power attenuation coefficient in 1/m.
  double alpha_per_m() const;
  /// Power loss of the whole span in dB.
  double loss_db() const { return alpha_db_km * length_km; }
  void validate() const;
};

/// Multiplies the spectrum by exp(+i beta2_tot omega^2 / 2), omega measured
/// from the grid center. Unitary.
ComplexSignal apply_cd(const ComplexSignal& x, double total_ps_nm, double wavelength_nm = 1550.0);
DualPolSignal apply_cd(const DualPolSignal& x, double total_ps_nm, double wavelength_nm = 1550.0);

struct StepConfig {
  /// Longest step.
  double step_km = 0.1;
  /// When positive, each step is also limited so that the nonlinear phase
  /// of the mean power, attenuated along the span, stays below this bound.
  double max_phase_rad = 0.0;
  /// Re-run with both limits halved and throw ConvergenceError if the output moves
  /// by more than `tolerance` relative RMS.
  bool check_convergence = false;
  double tolerance = 1e-4;
};

/// Step lengths in metres for one span carrying `mean_power_w` at its input.
/// The steps sum to the span length.
std::vector<double> step_schedule(const FiberSpanParams& span, const StepConfig& steps,
                                  double mean_power_w);

/// Symmetric split-step solution of the Manakov equation over one span.
/// Linear part: dispersion and loss; nonlinear part: the common phase
/// (8/9) gamma (|Ax|^2 + |Ay|^2) h on both polarizations. With gamma = 0
/// the span is applied as a single exact linear operator.
DualPolSignal propagate_manakov(const DualPolSignal& x, const FiberSpanParams& span,
                                const StepConfig& steps = {});

/// ASE power spectral density per polarization, (G - 1) n_sp h nu with
/// n_sp = 10^(NF/10) / 2, in W/Hz.
double ase_psd_per_pol(double gain_db, double nf_db, double wavelength_nm = 1550.0);

/// Field gain sqrt(G) plus white circular-Gaussian ASE. Throws ContractError
/// for negative gain.
ComplexSignal amplify(const ComplexSignal& x, double gain_db, double nf_db, std::uint64_t seed,
                      double wavelength_nm = 1550.0);
DualPolSignal amplify(const DualPolSignal& x, double gain_db, double nf_db, std::uint64_t seed,
                      double wavelength_nm = 1550.0);

enum class NoiseMode { TargetOsnr, AmplifierChain };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::TargetOsnr;
  double osnr_db = 20.0;
  double ref_bw_hz = 12.5e9;
  /// OSNR counts only the zero-mean signal power (the bias is excluded).
  bool exclude_bias = true;
  double nf_db = 5.0;
  double loss_budget_db = 26.0;
  double wavelength_nm = 1550.0;

  void validate() const;
};

/// Total noise PSD summed over polarizations, in W/Hz, that the spec
/// implies for a signal of power `p_signal_w`.
double noise_psd_total(const NoiseSpec& spec, double p_signal_w, int n_pols);

/// Adds white circular-Gaussian noise. In TargetOsnr mode the noise power in
/// ref_bw equals p_signal / OSNR, split equally over the polarizations. In
/// AmplifierChain mode a preamplifier compensating loss_budget_db adds its
/// ASE to the (already attenuated-and-restored) signal. Throws ContractError
/// if p_signal_w <= 0.
ComplexSignal load_noise_to_osnr(const ComplexSignal& x, const NoiseSpec& spec, double p_signal_w,
                                 std::uint64_t seed);
DualPolSignal load_noise_to_osnr(const DualPolSignal& x, const NoiseSpec& spec, double p_signal_w,
                                 std::uint64_t seed);

/// Haar-distributed 2x2 unitary.
Eigen::Matrix2cd haar_unitary(std::uint64_t seed);

/// (x', y')^T = U (x, y)^T at every sample.
DualPolSignal rotate(const DualPolSignal& x, const Eigen::Matrix2cd& jones);

std::pair<DualPolSignal, Eigen::Matrix2cd> random_pol_rotation(const DualPolSignal& x,
                                                               std::uint64_t seed);

/// Splits a channel into its (lower, upper) sideband branches.
std::pair<ComplexSignal, ComplexSignal> deinterleave(const ComplexSignal& x,
                                                     const InterleaverPair& filters);

}  // namespace kktx
