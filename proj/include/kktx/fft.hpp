#pragma once

#include <Eigen/Dense>

namespace kktx::fft {

// Forward transform is unscaled, inverse carries the 1/N factor.
// Each thread keeps its own plan cache, so both are safe to call concurrently.
Eigen::VectorXcd forward(const Eigen::VectorXcd& x);
Eigen::VectorXcd inverse(const Eigen::VectorXcd& spectrum);

}  // namespace kktx::fft
