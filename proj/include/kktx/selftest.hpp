#pragma once

// Fast property checks of the numerical core. Each check reports the
// measured quantities alongside the verdict.

#include <string>
#include <vector>

namespace kktx {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// H{cos} = sin, H(H(x)) = -x, linearity and one-sided analytic spectra.
CheckResult check_hilbert_suite();
/// Dispersion unitarity, round trip and Gaussian broadening.
CheckResult check_dispersion();
/// Manakov linear limit, energy, CW phase, unitary covariance, soliton.
CheckResult check_manakov();
/// Noiseless KK-PAM field recovery and its dependence on the up-sampling.
CheckResult check_kk_identity();
/// kk(c^2 I) = c kk(I).
CheckResult check_kk_scaling();
/// Haar rotation followed by data-aided inversion over 50 seeds.
CheckResult check_polmux_loop();

std::vector<CheckResult> run_selftest();

}  // namespace kktx
