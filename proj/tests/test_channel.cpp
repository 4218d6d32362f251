#include <doctest.h>

#include <cmath>
#include <random>

#include "kktx/channel.hpp"
#include "kktx/errors.hpp"

using namespace kktx;

namespace {

ComplexSignal random_field(Index n, double fs, std::uint64_t seed, double power = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * power));
  Samples s(n);
  for (Index k = 0; k < n; ++k) s[k] = Complex(g(rng), g(rng));
  // Keep the content well inside the band.
  return lowpass(ComplexSignal(s, fs), 0.25 * fs);
}

DualPolSignal random_dual(Index n, double fs, std::uint64_t seed, double power = 1.0) {
  return DualPolSignal(random_field(n, fs, seed, power), random_field(n, fs, seed + 1000, power));
}

double rms_width(const ComplexSignal& x) {
  const Index n = x.size();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k - n / 2) / x.sample_rate_hz();
    const double p = std::norm(x.samples()[k]);
    m0 += p;
    m1 += p * t;
    m2 += p * t * t;
  }
  const double mean = m1 / m0;
  return std::sqrt(m2 / m0 - mean * mean);
}

double dual_rms(const DualPolSignal& a, const DualPolSignal& b) {
  const double num = (a.x().samples() - b.x().samples()).squaredNorm() +
                     (a.y().samples() - b.y().samples()).squaredNorm();
  const double den = b.x().samples().squaredNorm() + b.y().samples().squaredNorm();
  return std::sqrt(num / den);
}

FiberSpanParams lossless(double gamma) {
  FiberSpanParams span;
  span.alpha_db_km = 0.0;
  span.gamma_per_W_km = gamma;
  return span;
}

}  // namespace

TEST_CASE("span parameters derive beta2 and totals") {
  const FiberSpanParams span;
  // -D lambda^2 / (2 pi c) for 17 ps/nm/km at 1550 nm is about -21.68 ps^2/km.
  CHECK(span.beta2_s2_per_m() * 1e24 * 1e3 == doctest::Approx(-21.68).epsilon(1e-3));
  CHECK(span.total_dispersion_ps_nm() == doctest::Approx(1700.0));
  CHECK(beta2_total_s2(1700.0) == doctest::Approx(span.beta2_s2_per_m() * 1e5));
  FiberSpanParams bad;
  bad.length_km = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("dispersion is unitary and invertible") {
  const ComplexSignal x = random_field(4096, 256e9, 1);
  CHECK(relative_rms(apply_cd(x, 0.0).samples(), x.samples()) == 0.0);
  const ComplexSignal y = apply_cd(x, 1700.0);
  CHECK(std::abs(y.energy() - x.energy()) / x.energy() < 1e-12);
  CHECK(relative_rms(apply_cd(y, -1700.0).samples(), x.samples()) < 1e-10);
}

TEST_CASE("Gaussian pulse broadens by the closed-form factor") {
  const Index n = 8192;
  const double fs = 2e12;
  const double t0 = 20e-12;
  Samples s(n);
  for (Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k - n / 2) / fs;
    s[k] = std::exp(-t * t / (2.0 * t0 * t0));
  }
  const ComplexSignal x(s, fs);
  const double b2z = beta2_total_s2(1700.0);
  const double expected = std::sqrt(1.0 + std::pow(b2z / (t0 * t0), 2));
  const double measured = rms_width(apply_cd(x, 1700.0)) / rms_width(x);
  CHECK(measured == doctest::Approx(expected).epsilon(0.005));
}

TEST_CASE("Manakov linear limit equals apply_cd") {
  const DualPolSignal x = random_dual(4096, 256e9, 2);
  const DualPolSignal out = propagate_manakov(x, lossless(0.0));
  const DualPolSignal ref = apply_cd(x, 1700.0);
  CHECK(dual_rms(out, ref) < 1e-9);
}

TEST_CASE("Manakov with gamma = 0 is linear") {
  const DualPolSignal a = random_dual(2048, 256e9, 3);
  const DualPolSignal b = random_dual(2048, 256e9, 4);
  const DualPolSignal sum(a.x().with_samples(a.x().samples() + b.x().samples()),
                          a.y().with_samples(a.y().samples() + b.y().samples()));
  FiberSpanParams span;
  span.gamma_per_W_km = 0.0;
  const DualPolSignal pa = propagate_manakov(a, span);
  const DualPolSignal pb = propagate_manakov(b, span);
  const DualPolSignal ps = propagate_manakov(sum, span);
  const DualPolSignal ref(pa.x().with_samples(pa.x().samples() + pb.x().samples()),
                          pa.y().with_samples(pa.y().samples() + pb.y().samples()));
  CHECK(dual_rms(ps, ref) < 1e-10);
}

TEST_CASE("lossless nonlinear propagation conserves energy") {
  const DualPolSignal x = random_dual(2048, 256e9, 5, 0.01);
  const DualPolSignal out = propagate_manakov(x, lossless(1.3), StepConfig{1.0});
  CHECK(std::abs(out.mean_power() - x.mean_power()) / x.mean_power() < 1e-9);
}

TEST_CASE("loss attenuates the span by alpha L") {
  const DualPolSignal x = random_dual(1024, 256e9, 6, 1e-3);
  const FiberSpanParams span;
  const DualPolSignal out = propagate_manakov(x, span, StepConfig{1.0});
  CHECK(10.0 * std::log10(x.mean_power() / out.mean_power()) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("CW wave acquires the Manakov nonlinear phase") {
  const double p = 0.01;
  FiberSpanParams span = lossless(1.3);
  span.dispersion_ps_nm_km = 0.0;
  const ComplexSignal cw(Samples::Constant(64, Complex(std::sqrt(p), 0.0)), 100e9);
  const DualPolSignal out =
      propagate_manakov(DualPolSignal(cw, ComplexSignal::zeros(64, 100e9)), span);
  const double expected = 8.0 / 9.0 * 1.3e-3 * p * 100e3;
  for (Index k = 0; k < 64; ++k) {
    CHECK(std::abs(std::arg(out.x().samples()[k]) - expected) < 1e-9);
    CHECK(std::abs(std::abs(out.x().samples()[k]) - std::sqrt(p)) < 1e-9);
  }
  CHECK(out.y().samples().isZero(0.0));
}

TEST_CASE("Manakov propagation commutes with constant unitaries") {
  const DualPolSignal x = random_dual(2048, 256e9, 7, 0.02);
  const Eigen::Matrix2cd u = haar_unitary(99);
  const FiberSpanParams span;
  const StepConfig steps{2.0};
  const DualPolSignal lhs = propagate_manakov(rotate(x, u), span, steps);
  const DualPolSignal rhs = rotate(propagate_manakov(x, span, steps), u);
  CHECK(dual_rms(lhs, rhs) < 1e-9);
}

TEST_CASE("fundamental soliton keeps its shape over one soliton period") {
  const Index n = 4096;
  const double fs = 4e12;
  const double t0 = 10e-12;
  FiberSpanParams span = lossless(1.3);
  const double b2 = std::abs(span.beta2_s2_per_m());
  const double p0 = b2 / (8.0 / 9.0 * span.gamma_per_W_m() * t0 * t0);
  const double z0 = 0.5 * kPi * t0 * t0 / b2;
  span.length_km = z0 * 1e-3;
  Samples s(n);
  for (Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k - n / 2) / fs;
    s[k] = std::sqrt(p0) / std::cosh(t / t0);
  }
  const ComplexSignal in(s, fs);
  const DualPolSignal out =
      propagate_manakov(DualPolSignal(in, ComplexSignal::zeros(n, fs)), span, StepConfig{0.02});
  const Samples a_in = in.samples().cwiseAbs().cast<Complex>();
  const Samples a_out = out.x().samples().cwiseAbs().cast<Complex>();
  CHECK(relative_rms(a_out, a_in) < 0.01);

  // Without the nonlinearity the same pulse spreads visibly.
  span.gamma_per_W_km = 0.0;
  const DualPolSignal lin = propagate_manakov(DualPolSignal(in, ComplexSignal::zeros(n, fs)), span);
  CHECK(relative_rms(lin.x().samples().cwiseAbs().cast<Complex>(), a_in) > 0.1);
}

TEST_CASE("convergence self-check flags coarse steps") {
  const DualPolSignal x = random_dual(1024, 256e9, 8, 0.5);
  FiberSpanParams span = lossless(1.3);
  CHECK_THROWS_AS(propagate_manakov(x, span, StepConfig{50.0, 0.0, true, 1e-4}), ConvergenceError);
  const DualPolSignal weak = random_dual(1024, 256e9, 8, 1e-4);
  CHECK_NOTHROW(propagate_manakov(weak, span, StepConfig{0.1, 0.0, true, 1e-4}));
  CHECK_THROWS_AS(propagate_manakov(x, span, StepConfig{0.0}), ContractError);
}

TEST_CASE("phase-bounded step schedule") {
  FiberSpanParams span;  // 100 km, 0.2 dB/km
  span.gamma_per_W_km = 1.3;
  const double p0 = 0.01;
  const StepConfig fixed{1.0};
  const auto uniform = step_schedule(span, fixed, p0);
  CHECK(uniform.size() == 100);

  const StepConfig bounded{1.0, 1e-3};
  const auto h = step_schedule(span, bounded, p0);
  double z = 0.0;
  const double kerr = 8.0 / 9.0 * span.gamma_per_W_m();
  for (double hi : h) {
    CHECK(hi > 0.0);
    CHECK(hi <= 1000.0 + 1e-9);
    const double p = p0 * std::exp(-span.alpha_per_m() * z);
    CHECK(kerr * p * hi <= 1e-3 * (1.0 + 1e-12));
    z += hi;
  }
  CHECK(z == doctest::Approx(1e5).epsilon(1e-12));
  // Short steps near the input, capped steps once the power has decayed.
  CHECK(h.front() < 100.0);
  CHECK(h.back() <= 1000.0);
  CHECK(h[h.size() / 2] > h.front());

  // At high launch power the bound places short steps where they matter:
  // fewer steps than a uniform 0.25 km grid and a smaller error.
  span.length_km = 100.0;
  const DualPolSignal x = random_dual(2048, 256e9, 21, 0.05);
  const DualPolSignal ref = propagate_manakov(x, span, StepConfig{0.005});
  const StepConfig tight{0.5, 5e-3};
  const std::size_t n_tight = step_schedule(span, tight, x.mean_power()).size();
  const double e_tight = dual_rms(propagate_manakov(x, span, tight), ref);
  const double e_uniform = dual_rms(propagate_manakov(x, span, StepConfig{0.25}), ref);
  MESSAGE("bounded ", n_tight, " steps: ", e_tight, ", uniform 400 steps: ", e_uniform);
  CHECK(n_tight < 400);
  CHECK(e_tight < e_uniform);
  // Tightening the bound converges toward the reference.
  CHECK(dual_rms(propagate_manakov(x, span, StepConfig{0.5, 2e-2}), ref) > e_tight);
  CHECK_THROWS_AS(propagate_manakov(x, span, StepConfig{1.0, -1.0}), ContractError);
}

TEST_CASE("amplifier ASE density") {
  const double h = 6.62607015e-34;
  const double nu = 299792458.0 / 1550e-9;
  const double expected = (std::pow(10.0, 2.6) - 1.0) * (std::pow(10.0, 0.5) / 2.0) * h * nu;
  CHECK(ase_psd_per_pol(26.0, 5.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ase_psd_per_pol(26.0, 5.0) == doctest::Approx(8.0467918560e-17).epsilon(1e-9));
  CHECK(ase_psd_per_pol(0.0, 5.0) == 0.0);
}

TEST_CASE("amplify with 0 dB gain is the identity") {
  const ComplexSignal x = random_field(512, 100e9, 9);
  CHECK(relative_rms(amplify(x, 0.0, 5.0, 1).samples(), x.samples()) == 0.0);
  CHECK_THROWS_AS(amplify(x, -1.0, 5.0, 1), ContractError);
}

TEST_CASE("measured ASE power in 12.5 GHz matches PSD times bandwidth") {
  const double fs = 100e9;
  const ComplexSignal zero = ComplexSignal::zeros(4096, fs);
  double acc = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    acc += measure_power(amplify(zero, 26.0, 5.0, seed), Band{-6.25e9, 6.25e9});
  }
  CHECK(acc / 100.0 == doctest::Approx(ase_psd_per_pol(26.0, 5.0) * 12.5e9).epsilon(0.02));
}

TEST_CASE("amplification is deterministic per seed") {
  const DualPolSignal x = random_dual(512, 100e9, 10, 1e-3);
  const DualPolSignal a = amplify(x, 20.0, 5.0, 42);
  const DualPolSignal b = amplify(x, 20.0, 5.0, 42);
  CHECK(dual_rms(a, b) == 0.0);
}

TEST_CASE("noise loading hits the target OSNR") {
  const double fs = 100e9;
  const ComplexSignal zero = ComplexSignal::zeros(4096, fs);
  NoiseSpec spec;
  spec.osnr_db = 20.0;
  double acc = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    acc += measure_power(load_noise_to_osnr(zero, spec, 1.0, seed), Band{-6.25e9, 6.25e9});
  }
  const double measured_osnr_db = 10.0 * std::log10(1.0 / (acc / 100.0));
  CHECK(std::abs(measured_osnr_db - 20.0) < 0.1);

  const DualPolSignal zero2(zero, zero);
  acc = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    acc += measure_power(load_noise_to_osnr(zero2, spec, 1.0, seed).x(), Band{-6.25e9, 6.25e9});
  }
  CHECK(acc / 100.0 == doctest::Approx(0.005).epsilon(0.02));
}

TEST_CASE("noise loading edge cases") {
  const ComplexSignal x = random_field(1024, 100e9, 11);
  NoiseSpec spec;
  spec.osnr_db = 300.0;
  const ComplexSignal y = load_noise_to_osnr(x, spec, x.mean_power(), 3);
  CHECK((y.samples() - x.samples()).squaredNorm() < 1e-25 * x.samples().squaredNorm());
  CHECK_THROWS_AS(load_noise_to_osnr(x, spec, 0.0, 3), ContractError);

  // The bias does not enter the ratio: same P_s, same noise.
  spec.osnr_db = 15.0;
  Samples biased = x.samples();
  biased.array() += 3.0;
  const ComplexSignal nb = load_noise_to_osnr(x.with_samples(biased), spec, 1.0, 5);
  const ComplexSignal nu = load_noise_to_osnr(x, spec, 1.0, 5);
  Samples noise_b = nb.samples() - biased;
  Samples noise_u = nu.samples() - x.samples();
  CHECK(relative_rms(noise_b, noise_u) < 1e-12);
}

TEST_CASE("amplifier-chain noise mode uses the preamplifier ASE") {
  NoiseSpec spec;
  spec.mode = NoiseMode::AmplifierChain;
  CHECK(noise_psd_total(spec, 1e-3, 1) == doctest::Approx(ase_psd_per_pol(26.0, 5.0)));
  CHECK(noise_psd_total(spec, 1e-3, 2) == doctest::Approx(2.0 * ase_psd_per_pol(26.0, 5.0)));
}

TEST_CASE("Haar rotations are unitary, power preserving and uniform") {
  const DualPolSignal x = random_dual(1024, 100e9, 12);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const Eigen::Matrix2cd u = haar_unitary(seed);
    if (seed < 20) {
      CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
      const auto [y, m] = random_pol_rotation(x, seed);
      CHECK(std::abs(y.mean_power() - x.mean_power()) / x.mean_power() < 1e-12);
      CHECK((m - u).norm() == 0.0);
    }
    sum += std::norm(u(0, 0));
  }
  CHECK(sum / 10000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("de-interleaver separates the sidebands") {
  const Index n = 4096;
  const double fs = 256e9;
  const InterleaverPair il = make_interleavers(4, 36e9, 18.8e9);
  Samples s(n);
  const double f0 = 10e9 / (fs / n) * (fs / n);
  for (Index k = 0; k < n; ++k) s[k] = std::polar(1.0, 2.0 * kPi * f0 * k / fs);
  const auto [lo, hi] = deinterleave(ComplexSignal(s, fs), il);
  const double suppression_db = 10.0 * std::log10(hi.mean_power() / lo.mean_power());
  CHECK(suppression_db > 30.0);
  // |H(-28.8 GHz offset)|^2 - |H(8.8 GHz offset)|^2 from the filter formula.
  CHECK(suppression_db == doctest::Approx(129.29).epsilon(2e-3));

  const ComplexSignal dc(Samples::Constant(n, Complex(1.0, 0.0)), fs);
  const auto [lo0, hi0] = deinterleave(dc, il);
  CHECK(lo0.mean_power() == doctest::Approx(0.374733).epsilon(1e-5));
  CHECK(hi0.mean_power() == doctest::Approx(0.374733).epsilon(1e-5));

  const auto [lz, hz] = deinterleave(ComplexSignal::zeros(n, fs), il);
  CHECK(lz.samples().isZero(0.0));
  CHECK(hz.samples().isZero(0.0));
}
