#include "kktx/channel.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "kktx/errors.hpp"

namespace kktx {

double beta2_total_s2(double total_ps_nm, double wavelength_nm) {
  const double lambda = wavelength_nm * 1e-9;
  // 1 ps/nm = 1e-3 s/m.
  return -(total_ps_nm * 1e-3) * lambda * lambda / (2.0 * kPi * kSpeedOfLight);
}

double FiberSpanParams::beta2_s2_per_m() const {
  // 1 ps/(nm km) = 1e-6 s/m^2.
  const double lambda = reference_wavelength_nm * 1e-9;
  return -(dispersion_ps_nm_km * 1e-6) * lambda * lambda / (2.0 * kPi * kSpeedOfLight);
}

double FiberSpanParams::alpha_per_m() const { return alpha_db_km * std::log(10.0) / 10.0 * 1e-3; }

void FiberSpanParams::validate() const {
  if (!(length_km > 0.0)) throw ConfigError("span length must be positive");
  if (!(gamma_per_W_km >= 0.0)) throw ConfigError("nonlinear coefficient must be non-negative");
  if (!(alpha_db_km >= 0.0)) throw ConfigError("attenuation must be non-negative");
  if (!(reference_wavelength_nm > 0.0)) throw ConfigError("wavelength must be positive");
  if (!std::isfinite(dispersion_ps_nm_km)) throw ConfigError("dispersion must be finite");
}

namespace {

Samples cd_transfer(Index n, double sample_rate_hz, double beta2_s2) {
  const RealVector f = frequency_grid(n, sample_rate_hz);
  Samples h(n);
  for (Index k = 0; k < n; ++k) {
    const double w = 2.0 * kPi * f[k];
    h[k] = std::polar(1.0, 0.5 * beta2_s2 * w * w);
  }
  return h;
}

}  // namespace

ComplexSignal apply_cd(const ComplexSignal& x, double total_ps_nm, double wavelength_nm) {
  if (total_ps_nm == 0.0) return x;
  const Samples h = cd_transfer(x.size(), x.sample_rate_hz(), beta2_total_s2(total_ps_nm, wavelength_nm));
  Samples spec = fft::forward(x.samples());
  spec.array() *= h.array();
  return x.with_samples(fft::inverse(spec));
}

DualPolSignal apply_cd(const DualPolSignal& x, double total_ps_nm, double wavelength_nm) {
  return DualPolSignal(apply_cd(x.x(), total_ps_nm, wavelength_nm),
                       apply_cd(x.y(), total_ps_nm, wavelength_nm));
}

namespace {

// Linear operator exp((i beta2 w^2 / 2 - alpha / 2) h) for step h in metres.
Samples linear_step(Index n, double fs, const FiberSpanParams& span, double h_m) {
  const RealVector f = frequency_grid(n, fs);
  const double beta2 = span.beta2_s2_per_m();
  const double amp = std::exp(-0.5 * span.alpha_per_m() * h_m);
  Samples op(n);
  for (Index k = 0; k < n; ++k) {
    const double w = 2.0 * kPi * f[k];
    op[k] = std::polar(amp, 0.5 * beta2 * w * w * h_m);
  }
  return op;
}

}  // namespace

// Step lengths in metres. Each step is at most step_km long and, when
// max_phase_rad > 0, short enough that the mean-power nonlinear phase of
// the attenuated signal stays below max_phase_rad.
std::vector<double> step_schedule(const FiberSpanParams& span, const StepConfig& steps,
                                  double mean_power_w) {
  const double length_m = span.length_km * 1e3;
  const double h_max = steps.step_km * 1e3;
  std::vector<double> out;
  if (steps.max_phase_rad <= 0.0) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span.length_km / steps.step_km - 1e-9)));
    out.assign(n, length_m / static_cast<double>(n));
    return out;
  }
  const double kerr = 8.0 / 9.0 * span.gamma_per_W_m();
  double z = 0.0;
  while (z < length_m * (1.0 - 1e-12)) {
    const double p = mean_power_w * std::exp(-span.alpha_per_m() * z);
    double h = kerr * p > 0.0 ? steps.max_phase_rad / (kerr * p) : h_max;
    h = std::min({h, h_max, length_m - z});
    out.push_back(h);
    z += h;
  }
  return out;
}

namespace {

DualPolSignal split_step(const DualPolSignal& in, const FiberSpanParams& span, const StepConfig& steps) {
  const Index n = in.size();
  const double fs = in.sample_rate_hz();
  const double length_m = span.length_km * 1e3;
  if (span.gamma_per_W_km == 0.0) {
    const Samples op = linear_step(n, fs, span, length_m);
    Samples sx = fft::forward(in.x().samples());
    Samples sy = fft::forward(in.y().samples());
    sx.array() *= op.array();
    sy.array() *= op.array();
    return DualPolSignal(in.x().with_samples(fft::inverse(sx)),
                         in.y().with_samples(fft::inverse(sy)));
  }

  const std::vector<double> h = step_schedule(span, steps, in.mean_power());
  const double kerr = 8.0 / 9.0 * span.gamma_per_W_m();
  const bool dual = !in.y().samples().isZero(0.0);

  // Linear operator for a given length, reused while the length repeats.
  double cached_len = -1.0;
  Samples cached_op;
  auto op_for = [&](double len) -> const Samples& {
    if (len != cached_len) {
      cached_op = linear_step(n, fs, span, len);
      cached_len = len;
    }
    return cached_op;
  };

  Samples sx = fft::forward(in.x().samples());
  Samples sy = dual ? fft::forward(in.y().samples()) : Samples::Zero(n);
  double pending = 0.5 * h.front();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Samples& op = op_for(pending);
    sx.array() *= op.array();
    if (dual) sy.array() *= op.array();
    Samples tx = fft::inverse(sx);
    Samples ty = dual ? fft::inverse(sy) : Samples::Zero(n);
    const double phase = kerr * h[i];
    for (Index k = 0; k < n; ++k) {
      const Complex rot = std::polar(1.0, phase * (std::norm(tx[k]) + std::norm(ty[k])));
      tx[k] *= rot;
      if (dual) ty[k] *= rot;
    }
    sx = fft::forward(tx);
    if (dual) sy = fft::forward(ty);
    pending = 0.5 * h[i] + (i + 1 < h.size() ? 0.5 * h[i + 1] : 0.0);
  }
  const Samples& last = op_for(pending);
  sx.array() *= last.array();
  if (dual) sy.array() *= last.array();
  return DualPolSignal(in.x().with_samples(fft::inverse(sx)),
                       in.y().with_samples(dual ? fft::inverse(sy) : Samples::Zero(n)));
}

double dual_relative_rms(const DualPolSignal& a, const DualPolSignal& b) {
  const double num = (a.x().samples() - b.x().samples()).squaredNorm() +
                     (a.y().samples() - b.y().samples()).squaredNorm();
  const double den = b.x().samples().squaredNorm() + b.y().samples().squaredNorm();
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

DualPolSignal propagate_manakov(const DualPolSignal& x, const FiberSpanParams& span,
                                const StepConfig& steps) {
  span.validate();
  if (!(steps.step_km > 0.0)) throw ContractError("split-step size must be positive");
  if (steps.max_phase_rad < 0.0) throw ContractError("nonlinear phase bound must be >= 0");
  DualPolSignal out = split_step(x, span, steps);
  if (steps.check_convergence && span.gamma_per_W_km != 0.0) {
    StepConfig half = steps;
    half.step_km *= 0.5;
    half.max_phase_rad *= 0.5;
    DualPolSignal fine = split_step(x, span, half);
    const double change = dual_relative_rms(out, fine);
    if (change > steps.tolerance) {
      std::ostringstream msg;
      msg << "split-step did not converge: halving the " << steps.step_km
          << " km step changed the output by " << change << " relative RMS (tolerance "
          << steps.tolerance << ")";
      throw ConvergenceError(msg.str(), change);
    }
    return fine;
  }
  return out;
}

double ase_psd_per_pol(double gain_db, double nf_db, double wavelength_nm) {
  const double g = std::pow(10.0, gain_db / 10.0);
  const double n_sp = std::pow(10.0, nf_db / 10.0) / 2.0;
  const double nu = kSpeedOfLight / (wavelength_nm * 1e-9);
  return (g - 1.0) * n_sp * kPlanck * nu;
}

namespace {

// Circular complex Gaussian samples with E|n|^2 = variance.
Samples gaussian_noise(Index n, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  Samples out(n);
  for (Index k = 0; k < n; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    out[k] = Complex(re, im);
  }
  return out;
}

ComplexSignal add_white_noise(const ComplexSignal& x, double psd_w_hz, std::mt19937_64& rng) {
  if (psd_w_hz <= 0.0) return x;
  return x.with_samples(x.samples() + gaussian_noise(x.size(), psd_w_hz * x.sample_rate_hz(), rng));
}

}  // namespace

ComplexSignal amplify(const ComplexSignal& x, double gain_db, double nf_db, std::uint64_t seed,
                      double wavelength_nm) {
  if (!(gain_db >= 0.0)) throw ContractError("amplifier gain must be >= 0 dB");
  std::mt19937_64 rng(seed);
  const double g = std::pow(10.0, gain_db / 10.0);
  const ComplexSignal boosted = x.with_samples(x.samples() * std::sqrt(g));
  return add_white_noise(boosted, ase_psd_per_pol(gain_db, nf_db, wavelength_nm), rng);
}

DualPolSignal amplify(const DualPolSignal& x, double gain_db, double nf_db, std::uint64_t seed,
                      double wavelength_nm) {
  if (!(gain_db >= 0.0)) throw ContractError("amplifier gain must be >= 0 dB");
  std::mt19937_64 rng(seed);
  const double g = std::sqrt(std::pow(10.0, gain_db / 10.0));
  const double psd = ase_psd_per_pol(gain_db, nf_db, wavelength_nm);
  ComplexSignal px = add_white_noise(x.x().with_samples(x.x().samples() * g), psd, rng);
  ComplexSignal py = add_white_noise(x.y().with_samples(x.y().samples() * g), psd, rng);
  return DualPolSignal(std::move(px), std::move(py));
}

void NoiseSpec::validate() const {
  if (!(ref_bw_hz > 0.0)) throw ConfigError("OSNR reference bandwidth must be positive");
  if (mode == NoiseMode::TargetOsnr && !std::isfinite(osnr_db)) {
    throw ConfigError("target OSNR must be finite");
  }
  if (mode == NoiseMode::AmplifierChain && !(loss_budget_db >= 0.0)) {
    throw ConfigError("loss budget must be >= 0 dB");
  }
}

double noise_psd_total(const NoiseSpec& spec, double p_signal_w, int n_pols) {
  spec.validate();
  if (!(p_signal_w > 0.0)) throw ContractError("signal power for noise loading must be positive");
  if (spec.mode == NoiseMode::AmplifierChain) {
    return n_pols * ase_psd_per_pol(spec.loss_budget_db, spec.nf_db, spec.wavelength_nm);
  }
  const double osnr = std::pow(10.0, spec.osnr_db / 10.0);
  return p_signal_w / osnr / spec.ref_bw_hz;
}

ComplexSignal load_noise_to_osnr(const ComplexSignal& x, const NoiseSpec& spec, double p_signal_w,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return add_white_noise(x, noise_psd_total(spec, p_signal_w, 1), rng);
}

DualPolSignal load_noise_to_osnr(const DualPolSignal& x, const NoiseSpec& spec, double p_signal_w,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double per_pol = 0.5 * noise_psd_total(spec, p_signal_w, 2);
  ComplexSignal px = add_white_noise(x.x(), per_pol, rng);
  ComplexSignal py = add_white_noise(x.y(), per_pol, rng);
  return DualPolSignal(std::move(px), std::move(py));
}

Eigen::Matrix2cd haar_unitary(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::Matrix2cd z;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
  const Eigen::Matrix2cd q = qr.householderQ();
  const Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase freedom of QR so the result is Haar distributed.
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 2; ++i) {
    const double mag = std::abs(r(i, i));
    d(i, i) = mag > 0.0 ? r(i, i) / mag : Complex(1.0, 0.0);
  }
  return q * d;
}

DualPolSignal rotate(const DualPolSignal& x, const Eigen::Matrix2cd& jones) {
  const Samples& a = x.x().samples();
  const Samples& b = x.y().samples();
  Samples nx = jones(0, 0) * a + jones(0, 1) * b;
  Samples ny = jones(1, 0) * a + jones(1, 1) * b;
  return DualPolSignal(x.x().with_samples(std::move(nx)), x.y().with_samples(std::move(ny)));
}

std::pair<DualPolSignal, Eigen::Matrix2cd> random_pol_rotation(const DualPolSignal& x,
                                                               std::uint64_t seed) {
  const Eigen::Matrix2cd u = haar_unitary(seed);
  return {rotate(x, u), u};
}

std::pair<ComplexSignal, ComplexSignal> deinterleave(const ComplexSignal& x,
                                                     const InterleaverPair& filters) {
  return {apply_filter(x, filters.lower), apply_filter(x, filters.upper)};
}

}  // namespace kktx
