#include "kktx/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace kktx::fft {
namespace {

Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> instance;
  return instance;
}

}  // namespace

Eigen::VectorXcd forward(const Eigen::VectorXcd& x) {
  Eigen::VectorXcd out(x.size());
  engine().fwd(out.data(), x.data(), static_cast<int>(x.size()));
  return out;
}

Eigen::VectorXcd inverse(const Eigen::VectorXcd& spectrum) {
  Eigen::VectorXcd out(spectrum.size());
  engine().inv(out.data(), spectrum.data(), static_cast<int>(spectrum.size()));
  return out;
}

}  // namespace kktx::fft
