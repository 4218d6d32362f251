#include "kktx/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kktx/channel.hpp"
#include "kktx/modem.hpp"
#include "kktx/receiver.hpp"

namespace kktx {
namespace {

constexpr double kBaud = 48e9;
const PulseShape kPulse{PulseKind::RaisedCosine, 0.05, kBaud};

ComplexSignal random_field(Index n, double fs, std::uint64_t seed, double power = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * power));
  Samples s(n);
  for (Index k = 0; k < n; ++k) s[k] = Complex(g(rng), g(rng));
  return lowpass(ComplexSignal(s, fs), 0.25 * fs);
}

DualPolSignal random_dual(Index n, double fs, std::uint64_t seed, double power = 1.0) {
  return DualPolSignal(random_field(n, fs, seed, power), random_field(n, fs, seed + 1000, power));
}

double dual_rms(const DualPolSignal& a, const DualPolSignal& b) {
  const double num = (a.x().samples() - b.x().samples()).squaredNorm() +
                     (a.y().samples() - b.y().samples()).squaredNorm();
  const double den = b.x().samples().squaredNorm() + b.y().samples().squaredNorm();
  return std::sqrt(num / den);
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

ComplexSignal tone_cos(Index n, double fs, double f, bool sine) {
  RealVector v(n);
  for (Index k = 0; k < n; ++k) {
    const double ph = 2.0 * kPi * f * static_cast<double>(k) / fs;
    v[k] = sine ? std::sin(ph) : std::cos(ph);
  }
  return ComplexSignal::from_real(v, fs);
}

FiberSpanParams lossless(double gamma) {
  FiberSpanParams span;
  span.alpha_db_km = 0.0;
  span.gamma_per_W_km = gamma;
  return span;
}

KkConfig pam_kk(int upsample) {
  KkConfig cfg;
  cfg.adc_rate_hz = 17.0 / 16.0 * kBaud;
  cfg.upsample_factor = upsample;
  cfg.output_rate_hz = 2.0 * kBaud;
  return cfg;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

CheckResult check_hilbert_suite() {
  const Index n = 1024;
  const double fs = 1024.0;
  const ComplexSignal c = tone_cos(n, fs, 37.0, false);
  const ComplexSignal s = tone_cos(n, fs, 37.0, true);
  const double e_cos = relative_rms(hilbert(c).samples(), s.samples());

  const RealVector r = random_field(n, fs, 11).real();
  // Band-limit away from the Nyquist bin, which the transform maps to zero.
  const RealVector band = lowpass(ComplexSignal::from_real(r.array() - r.mean(), fs), 0.49 * fs).real();
  const ComplexSignal x = ComplexSignal::from_real(band, fs);
  const double e_hh = relative_rms(hilbert(hilbert(x)).samples(), (-x.samples()).eval());

  const ComplexSignal y = ComplexSignal::from_real(random_field(n, fs, 12).real(), fs);
  const Samples lhs = hilbert(x.with_samples(2.0 * x.samples() - 3.0 * y.samples())).samples();
  const Samples rhs = 2.0 * hilbert(x).samples() - 3.0 * hilbert(y).samples();
  const double e_lin = relative_rms(lhs, rhs);

  const Samples spec = spectrum(analytic(x));
  const RealVector f = frequency_grid(n, fs);
  double neg = 0.0, total = 0.0;
  for (Index k = 0; k < n; ++k) {
    total += std::norm(spec[k]);
    if (f[k] < 0.0) neg += std::norm(spec[k]);
  }
  const double one_sided = neg / total;

  CheckResult out{"hilbert/analytic suite", false, ""};
  out.passed = e_cos < 1e-12 && e_hh < 1e-10 && e_lin < 1e-12 && one_sided < 1e-20;
  out.detail = "H{cos}-sin " + fmt(e_cos) + ", H(H)+I " + fmt(e_hh) + ", linearity " + fmt(e_lin) +
               ", negative-band energy " + fmt(one_sided);
  return out;
}

CheckResult check_dispersion() {
  const ComplexSignal x = random_field(4096, 256e9, 1);
  const ComplexSignal y = apply_cd(x, 1700.0);
  const double energy = std::abs(y.energy() - x.energy()) / x.energy();
  const double round_trip = relative_rms(apply_cd(y, -1700.0).samples(), x.samples());

  const Index n = 8192;
  const double fs = 2e12;
  const double t0 = 20e-12;
  Samples s(n);
  for (Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k - n / 2) / fs;
    s[k] = std::exp(-t * t / (2.0 * t0 * t0));
  }
  const ComplexSignal g(s, fs);
  const double b2z = beta2_total_s2(1700.0);
  const double expected = std::sqrt(1.0 + std::pow(b2z / (t0 * t0), 2));
  const double measured = rms_width(apply_cd(g, 1700.0)) / rms_width(g);
  const double width_err = std::abs(measured / expected - 1.0);

  CheckResult out{"dispersion unitarity and broadening", false, ""};
  out.passed = energy < 1e-12 && round_trip < 1e-10 && width_err < 0.005;
  out.detail = "energy " + fmt(energy) + ", round trip " + fmt(round_trip) + ", width error " +
               fmt(width_err);
  return out;
}

CheckResult check_manakov() {
  const DualPolSignal a = random_dual(4096, 256e9, 2);
  const double linear = dual_rms(propagate_manakov(a, lossless(0.0)), apply_cd(a, 1700.0));

  const DualPolSignal b = random_dual(2048, 256e9, 5, 0.01);
  const DualPolSignal pb = propagate_manakov(b, lossless(1.3), StepConfig{1.0});
  const double energy = std::abs(pb.mean_power() - b.mean_power()) / b.mean_power();

  const double p = 0.01;
  FiberSpanParams cw_span = lossless(1.3);
  cw_span.dispersion_ps_nm_km = 0.0;
  const ComplexSignal cw(Samples::Constant(64, Complex(std::sqrt(p), 0.0)), 100e9);
  const DualPolSignal cw_out =
      propagate_manakov(DualPolSignal(cw, ComplexSignal::zeros(64, 100e9)), cw_span);
  const double phase_expected = 8.0 / 9.0 * 1.3e-3 * p * 100e3;
  double phase_err = 0.0;
  for (Index k = 0; k < 64; ++k) {
    phase_err = std::max(phase_err, std::abs(std::arg(cw_out.x().samples()[k]) - phase_expected));
  }

  const DualPolSignal c = random_dual(2048, 256e9, 7, 0.02);
  const Eigen::Matrix2cd u = haar_unitary(99);
  const FiberSpanParams span;
  const double covariance = dual_rms(propagate_manakov(rotate(c, u), span, StepConfig{2.0}),
                                     rotate(propagate_manakov(c, span, StepConfig{2.0}), u));

  const Index n = 4096;
  const double fs = 4e12;
  const double t0 = 10e-12;
  FiberSpanParams sol = lossless(1.3);
  const double b2 = std::abs(sol.beta2_s2_per_m());
  const double p0 = b2 / (8.0 / 9.0 * sol.gamma_per_W_m() * t0 * t0);
  sol.length_km = 0.5 * kPi * t0 * t0 / b2 * 1e-3;
  Samples s(n);
  for (Index k = 0; k < n; ++k) {
    s[k] = std::sqrt(p0) / std::cosh(static_cast<double>(k - n / 2) / fs / t0);
  }
  const ComplexSignal in(s, fs);
  const DualPolSignal out =
      propagate_manakov(DualPolSignal(in, ComplexSignal::zeros(n, fs)), sol, StepConfig{0.02});
  const double soliton = relative_rms(out.x().samples().cwiseAbs().cast<Complex>(),
                                      in.samples().cwiseAbs().cast<Complex>());

  CheckResult res{"Manakov solver properties", false, ""};
  res.passed = linear < 1e-9 && energy < 1e-9 && phase_err < 1e-9 && covariance < 1e-9 && soliton < 0.01;
  res.detail = "linear limit " + fmt(linear) + ", energy " + fmt(energy) + ", CW phase " +
               fmt(phase_err) + ", covariance " + fmt(covariance) + ", soliton " + fmt(soliton);
  return res;
}

CheckResult check_kk_identity() {
  TxConfig cfg;
  cfg.bias_power_ratio = 10.0;
  const SymbolFrame frame = make_frame(4096, 4, 6);
  const KkPamTx tx = build_kkpam(frame, kPulse, cfg, 16.0 * kBaud);
  const ComplexSignal truth = remove_constant_phase(decimate_to_rate(tx.field, 2.0 * kBaud));
  std::vector<double> errors;
  std::string detail;
  for (int u : {2, 3, 4, 6}) {
    const KkConfig kk = pam_kk(u);
    const KkResult rx = kk_reconstruct(adc(photodetect(tx.field), kk.adc_rate_hz), kk);
    errors.push_back(relative_rms(remove_constant_phase(rx.field).samples(), truth.samples()));
    detail += (detail.empty() ? "" : ", ") + std::string("u=") + std::to_string(u) + " " + fmt(errors.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
  return CheckResult{"KK reconstruction identity", errors[1] < 1e-3 && decreasing, detail};
}

CheckResult check_kk_scaling() {
  TxConfig cfg;
  cfg.bias_power_ratio = 10.0;
  const KkPamTx tx = build_kkpam(make_frame(2048, 4, 9), kPulse, cfg, 4.0 * kBaud);
  const KkConfig kk = pam_kk(3);
  const ComplexSignal current = adc(photodetect(tx.field), kk.adc_rate_hz);
  const double c = 3.7;
  const ComplexSignal base = kk_reconstruct(current, kk).field;
  const ComplexSignal scaled_in = current.with_samples(current.samples() * (c * c));
  const double err = relative_rms(kk_reconstruct(scaled_in, kk).field.samples(), (c * base.samples()).eval());
  return CheckResult{"KK scaling covariance", err < 1e-12, "relative error " + fmt(err)};
}

CheckResult check_polmux_loop() {
  TxConfig cfg;
  cfg.scheme = Scheme::TwoSided;
  cfg.gap_hz = 8.6e9;
  KkConfig kk;
  kk.adc_rate_hz = 20.0 / 16.0 * kBaud;
  kk.output_rate_hz = 2.0 * kBaud;
  const double fs = 4.0 * kBaud;
  const Index n_sym = 1024;
  double worst_xt = -std::numeric_limits<double>::infinity();
  long long errors = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SymbolFrame f[2][2];
    TwoSidedTx tx[2] = {
        build_two_sided(f[0][0] = make_frame(n_sym, 4, 4 * seed), f[0][1] = make_frame(n_sym, 4, 4 * seed + 1),
                        kPulse, cfg, fs),
        build_two_sided(f[1][0] = make_frame(n_sym, 4, 4 * seed + 2), f[1][1] = make_frame(n_sym, 4, 4 * seed + 3),
                        kPulse, cfg, fs)};
    const Eigen::Matrix2cd u = haar_unitary(1000 + seed);
    for (int s = 0; s < 2; ++s) {
      const bool lower = s == 0;
      const DualPolSignal side = lower ? DualPolSignal(tx[0].lower, tx[1].lower)
                                       : DualPolSignal(tx[0].upper, tx[1].upper);
      const DualPolSignal rx = rotate(side, u);
      const double p_s = 0.5 * rx.mean_power();
      ComplexSignal fields[2] = {rx.x(), rx.y()};
      for (auto& field : fields) {
        const ComplexSignal mapped = lower ? field.with_samples(field.samples().conjugate()) : field;
        const KkResult r = kk_reconstruct(adc(photodetect(add_lo(mapped, std::sqrt(10.0 * p_s))), kk.adc_rate_hz), kk);
        ComplexSignal out = remove_constant_phase(r.field);
        if (lower) out = out.with_samples(out.samples().conjugate());
        const Complex mean = out.samples().mean();
        field = out.with_samples(out.samples().array() - mean);
      }
      Samples refs[2];
      for (int p = 0; p < 2; ++p) {
        refs[p] = decimate_to_rate(lower ? tx[p].lower : tx[p].upper, kk.output_rate_hz).samples();
      }
      const PolDemuxResult d = polmux_demux(fields[0], fields[1], refs[0], refs[1], 512);
      // Effective tributary matrix after demultiplexing, fitted over the frame.
      Eigen::MatrixXcd o(2, d.x.size()), r(2, d.x.size());
      o.row(0) = d.x.samples().transpose();
      o.row(1) = d.y.samples().transpose();
      r.row(0) = refs[0].transpose();
      r.row(1) = refs[1].transpose();
      const Eigen::Matrix2cd m = (o * r.adjoint()) * (r * r.adjoint()).inverse();
      worst_xt = std::max(worst_xt, crosstalk_db(m));
      for (int p = 0; p < 2; ++p) {
        const ComplexSignal lane = extract_real_lane(p == 0 ? d.x : d.y, 0.0, cfg.gap_hz,
                                                     lower ? Sideband::Lower : Sideband::Upper,
                                                     kPulse.half_bandwidth_hz());
        errors += decide_and_count(lane, f[p][s], kPulse).n_errors;
      }
    }
  }
  return CheckResult{"polarization demultiplexing loop", errors == 0 && worst_xt < -30.0,
                     "bit errors " + std::to_string(errors) + ", worst cross-talk " + fmt(worst_xt) + " dB"};
}

std::vector<CheckResult> run_selftest() {
  return {check_hilbert_suite(), check_dispersion(), check_manakov(),
          check_kk_identity(),   check_kk_scaling(), check_polmux_loop()};
}

}  // namespace kktx
