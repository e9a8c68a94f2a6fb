#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isocorr {

using cxd = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Error taxonomy; the CLI maps these onto its exit codes.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double construction = 1e-12;   // isometries, single projectors
  double composed = 1e-10;       // operators built from compositions
  double decision = 1e-9;        // witness verdict threshold
  double kernel_rel = 1e-9;      // |eig| < kernel_rel * max|eig| counts as kernel
};

struct BuildOptions {
  // Refuse dense construction when a dim(Sym2(H))^2 complex matrix would not fit.
  double memory_cap_bytes = 2.0 * 1073741824.0;
  Tolerances tol{};
};

inline double max_abs(const MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const MatrixXcd& m) {
  return max_abs(m - m.adjoint());
}

inline double idempotence_error(const MatrixXcd& m) {
  return max_abs(m * m - m);
}

}  // namespace isocorr
