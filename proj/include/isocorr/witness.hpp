#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "isocorr/common.hpp"
#include "isocorr/operators.hpp"
#include "isocorr/spaces.hpp"

namespace isocorr {

// A validated density matrix together with the class whose physical space it
// lives on.
struct DensityMatrix {
  StateClass cls;
  MatrixXcd rho;

  Index dim() const { return rho.rows(); }
};

inline double purity(const MatrixXcd& rho) { return (rho * rho).trace().real(); }

inline DensityMatrix make_density_matrix(const StateClass& cls, MatrixXcd rho,
                                         double tol = 1e-10) {
  validate(cls);
  if (rho.rows() != rho.cols()) throw validation_error("density matrix must be square");
  if (rho.rows() != dim_space(cls))
    throw validation_error("density matrix dimension does not match class space " +
                           to_string(cls));
  if (hermiticity_error(rho) > tol)
    throw validation_error("density matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
    throw validation_error("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw validation_error("density matrix has a negative eigenvalue");
  return {cls, std::move(rho)};
}

struct WitnessReport {
  double f = 0.0;
  double purity = 0.0;
  bool correlated = false;
  StateClass cls;
  double decision_tol = 1e-9;
};

namespace detail {

inline double trace_product(const MatrixXcd& a, const MatrixXcd& b) {
  // tr(a b) for Hermitian-in-effect arguments; drops the ~0 imaginary part.
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace detail

// f(rho) = tr((rho x rho) V) with V = A - P^asym, evaluated as
// tr((rho x rho) A) - (1 - tr rho^2)/2 since tr((rho x rho) tau) = tr rho^2.
inline WitnessReport witness_value(const ProjectorA& a, const DensityMatrix& rho,
                                   double decision_tol = 1e-9) {
  if (rho.dim() != a.phys_dim) throw validation_error("witness: dimension mismatch");
  const MatrixXcd rr = kron(rho.rho, rho.rho);
  const double term_a = detail::trace_product(rr, a.matrix);
  const double p = purity(rho.rho);
  const double f = term_a - 0.5 * (1.0 - p);
  return {f, p, f > decision_tol, a.cls, decision_tol};
}

// Same witness through the matrix-free A; spectral decomposition of rho keeps
// the two-copy space implicit.
inline double witness_value_matrix_free(const MatrixFreeA& a, const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho.rho);
  const VectorXd p = es.eigenvalues();
  const Index n = rho.dim();
  double term_a = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(p[i]) < 1e-16) continue;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(p[j]) < 1e-16) continue;
      const VectorXcd ab = kron_vec(es.eigenvectors().col(i), es.eigenvectors().col(j));
      term_a += p[i] * p[j] * (ab.adjoint() * a.apply(ab))(0).real();
    }
  }
  return term_a - 0.5 * (1.0 - purity(rho.rho));
}

// tr((rho1 x rho2) V): a positive value certifies both states correlated.
inline double bilinear_witness(const ProjectorA& a, const DensityMatrix& rho1,
                               const DensityMatrix& rho2) {
  if (rho1.dim() != a.phys_dim || rho2.dim() != a.phys_dim)
    throw validation_error("bilinear witness: dimension mismatch");
  const MatrixXcd rr = kron(rho1.rho, rho2.rho);
  const double term_a = detail::trace_product(rr, a.matrix);
  // tr((rho1 x rho2) P^asym) = (tr rho1 tr rho2 - tr(rho1 rho2))/2
  const double overlap = detail::trace_product(rho1.rho, rho2.rho);
  return term_a - 0.5 * (1.0 - overlap);
}

// tr((rho x B) V) for positive semidefinite B (Theorem-style linear witness).
inline double linear_witness(const ProjectorA& a, const DensityMatrix& rho,
                             const MatrixXcd& b, double psd_tol = 1e-10) {
  if (rho.dim() != a.phys_dim || b.rows() != a.phys_dim || b.cols() != a.phys_dim)
    throw validation_error("linear witness: dimension mismatch");
  if (hermiticity_error(b) > psd_tol)
    throw validation_error("linear witness: B is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(b, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw validation_error("linear witness: B is not positive semidefinite");
  const MatrixXcd rb = kron(rho.rho, b);
  const double term_a = detail::trace_product(rb, a.matrix);
  const double tr_b = b.trace().real();
  const double overlap = detail::trace_product(rho.rho, b);
  return term_a - 0.5 * (tr_b - overlap);
}

// <psi psi| A |psi psi>; a value at numerical zero certifies membership in M.
inline double pure_membership(const ProjectorA& a, const VectorXcd& psi,
                              double norm_tol = 1e-10) {
  if (psi.size() != a.phys_dim) throw validation_error("membership: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > norm_tol)
    throw validation_error("membership: state vector is not normalized");
  const VectorXcd pp = kron_vec(psi, psi);
  return (pp.adjoint() * a.matrix * pp)(0).real();
}

// ---------------------------------------------------------------------------
// Fermionic correlation matrix M_ij = (i/2) tr(rho [c_i, c_j]).

inline MatrixXd correlation_matrix(const MatrixXcd& rho_fock, int d,
                                   double real_tol = 1e-10) {
  const Index full = Index{1} << d;
  MatrixXcd rho = rho_fock;
  if (rho.rows() == (Index{1} << (d - 1))) {
    const MatrixXd e = sector_isometry(d, FockSector::Even).matrix;
    rho = e * rho * e.transpose();
  }
  if (rho.rows() != full)
    throw validation_error("correlation_matrix: state is on neither the full Fock space "
                           "nor the even sector");
  const auto cs = majorana_ops(d);
  MatrixXd m(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i) {
    m(i, i) = 0.0;
    for (int j = i + 1; j < 2 * d; ++j) {
      // [c_i, c_j] = 2 c_i c_j for i != j
      const cxd val = cxd(0, 1) * (rho * (cs[i] * cs[j])).trace();
      if (std::abs(val.imag()) > real_tol)
        throw numeric_error("correlation_matrix: entry has a non-real part");
      m(i, j) = val.real();
      m(j, i) = -val.real();
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Two-fermion depolarization family and its closed-form criterion.

struct TwoFermionSchmidt {
  int d = 0;
  VectorXd lambdas;  // nonincreasing, nonnegative, sum of squares 1
};

inline TwoFermionSchmidt make_two_fermion_schmidt(int d, VectorXd lambdas,
                                                  double tol = 1e-12) {
  if (d < 2) throw validation_error("two-fermion family requires d >= 2");
  if (lambdas.size() < 1 || lambdas.size() > d / 2)
    throw validation_error("schmidt vector length must be in 1..floor(d/2)");
  for (Index i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 0) throw validation_error("schmidt coefficients must be nonnegative");
    if (i > 0 && lambdas[i] > lambdas[i - 1] + tol)
      throw validation_error("schmidt coefficients must be nonincreasing");
  }
  if (std::abs(lambdas.squaredNorm() - 1.0) > tol)
    throw validation_error("schmidt coefficients must have unit square sum");
  return {d, std::move(lambdas)};
}

// psi = sum_i lambda_i e_{2i-1} wedge e_{2i} in the ordered wedge basis.
inline VectorXcd two_fermion_state(const TwoFermionSchmidt& s) {
  const auto tuples = wedge_tuples(s.d, 2);
  VectorXcd psi = VectorXcd::Zero(static_cast<Index>(tuples.size()));
  for (Index i = 0; i < s.lambdas.size(); ++i) {
    const std::vector<int> want{static_cast<int>(2 * i), static_cast<int>(2 * i + 1)};
    const auto it = std::find(tuples.begin(), tuples.end(), want);
    psi[static_cast<Index>(it - tuples.begin())] = s.lambdas[i];
  }
  return psi;
}

// rho_psi(p) = (1-p)|psi><psi| + p * 2I/(d(d-1)) on the two-fermion space.
inline DensityMatrix depolarized_slater_state(const TwoFermionSchmidt& s, double p) {
  if (p < 0.0 || p > 1.0) throw validation_error("depolarization parameter must be in [0,1]");
  const VectorXcd psi = two_fermion_state(s);
  const Index n = psi.size();
  MatrixXcd rho = (1.0 - p) * (psi * psi.adjoint()) +
                  (p / static_cast<double>(n)) * MatrixXcd::Identity(n, n);
  return make_density_matrix(slater_class(s.d, 2), std::move(rho));
}

inline double slater_chi1(int d) {
  return 3.0 + 2.0 * (d - 2) * (d - 3) / (static_cast<double>(d) * (d - 1));
}

inline double slater_chi2(int d) {
  return 2.0 * (d + 1) / (d - 1.0) + 6.0 / (static_cast<double>(d) * (d - 1));
}

// Closed-form left-hand side of the depolarized two-fermion criterion
// ("correlated if LHS > 3"). The numeric witness is authoritative where the
// two disagree; see slater-example in the CLI.
inline double slater_criterion_lhs(const TwoFermionSchmidt& s, double p) {
  if (p < 0.0 || p > 1.0) throw validation_error("depolarization parameter must be in [0,1]");
  double sum4 = 0.0;
  for (Index i = 0; i < s.lambdas.size(); ++i) sum4 += std::pow(s.lambdas[i], 4);
  return (1 - p) * (1 - p) * (5.0 - 2.0 * sum4) + 2.0 * p * (1 - p) * slater_chi1(s.d) +
         p * p * slater_chi2(s.d);
}

}  // namespace isocorr
