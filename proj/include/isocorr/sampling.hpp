#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "isocorr/common.hpp"
#include "isocorr/operators.hpp"
#include "isocorr/spaces.hpp"
#include "isocorr/witness.hpp"

namespace isocorr {

// Ordered spectrum defining an isospectral orbit; stored ascending.
struct Spectrum {
  VectorXd p;

  Index size() const { return p.size(); }
  double purity() const { return p.squaredNorm(); }
};

inline Spectrum make_spectrum(VectorXd p, double tol = 1e-12) {
  if (p.size() < 1) throw validation_error("spectrum must be nonempty");
  double sum = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] < -tol) throw validation_error("spectrum entries must be nonnegative");
    if (p[i] < 0) p[i] = 0.0;
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > tol) throw validation_error("spectrum must sum to 1");
  std::sort(p.data(), p.data() + p.size());
  return {std::move(p)};
}

// ((1-p) + p/N, p/N, ..., p/N): the depolarized family used in purity sweeps.
inline Spectrum depolarized_spectrum(Index n, double p) {
  if (p < 0.0 || p > 1.0) throw validation_error("depolarization parameter must be in [0,1]");
  VectorXd v = VectorXd::Constant(n, p / static_cast<double>(n));
  v[n - 1] += 1.0 - p;
  return make_spectrum(std::move(v));
}

inline Spectrum pure_spectrum(Index n) { return depolarized_spectrum(n, 0.0); }

// ---------------------------------------------------------------------------
// Counter-based reproducible randomness: a stream is fully determined by
// (master seed, stream index), independent of thread count or call order.
// All draws go through explicit bit manipulation so the sequence does not
// depend on the standard library's distribution implementations.

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
    eng_.seed(seq);
  }

  std::uint64_t next_u64() { return eng_(); }

  double uniform01() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(phi);
    have_cached_ = true;
    return r * std::cos(phi);
  }

  cxd complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

 private:
  std::mt19937_64 eng_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// ---------------------------------------------------------------------------
// Haar-distributed unitary: Ginibre draw, QR, then the R-diagonal phase
// correction that makes the distribution exactly invariant.

inline MatrixXcd haar_unitary(Index n, RandomStream& stream) {
  if (n < 1) throw validation_error("haar_unitary: N must be >= 1");
  MatrixXcd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = stream.complex_normal();
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    const cxd rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0.0) ? rjj / mag : cxd(1.0, 0.0);
  }
  return q;
}

inline VectorXcd haar_vector(Index n, RandomStream& stream) {
  VectorXcd v(n);
  for (Index i = 0; i < n; ++i) v[i] = stream.complex_normal();
  return v / v.norm();
}

// rho = U diag(spec) U^dag with U Haar.
inline DensityMatrix isospectral_sample(const StateClass& cls, const Spectrum& spec,
                                        RandomStream& stream) {
  const Index n = dim_space(cls);
  if (spec.size() != n)
    throw validation_error("spectrum length does not match class dimension");
  const MatrixXcd u = haar_unitary(n, stream);
  MatrixXcd rho = u * spec.p.asDiagonal() * u.adjoint();
  return {cls, std::move(rho)};
}

// ---------------------------------------------------------------------------
// Random pure members of each class, in physical-space coordinates.

namespace detail {

inline VectorXcd random_separable_member(int d, int L, RandomStream& stream) {
  VectorXcd v = haar_vector(d, stream);
  for (int k = 1; k < L; ++k) v = kron_vec(v, haar_vector(d, stream)).eval();
  return v;
}

inline VectorXcd random_bosonic_member(int d, int L, RandomStream& stream,
                                       const MatrixXd& embed) {
  const VectorXcd phi = haar_vector(d, stream);
  VectorXcd v = phi;
  for (int k = 1; k < L; ++k) v = kron_vec(v, phi).eval();
  return embed.transpose() * v;
}

// Wedge of the first L columns of a Haar unitary; coordinates are the L x L
// minors over increasing row tuples (Cauchy-Binet gives unit norm).
inline VectorXcd random_slater_member(int d, int L, RandomStream& stream) {
  const MatrixXcd u = haar_unitary(d, stream);
  const auto tuples = wedge_tuples(d, L);
  VectorXcd v(static_cast<Index>(tuples.size()));
  for (Index c = 0; c < v.size(); ++c) {
    MatrixXcd sub(L, L);
    for (int r = 0; r < L; ++r) sub.row(r) = u.row(tuples[c][r]).head(L);
    v[c] = sub.determinant();
  }
  return v;
}

// exp(-iH)|0> with H = (i/4) sum h_kl c_k c_l, h real antisymmetric Gaussian;
// returned in even-sector coordinates.
inline VectorXcd random_gaussian_member(int d, RandomStream& stream) {
  const auto cs = majorana_ops(d);
  const Index dim = Index{1} << d;
  MatrixXcd h_op = MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < 2 * d; ++k)
    for (int l = k + 1; l < 2 * d; ++l) {
      const double hkl = stream.normal();
      // (i/4)(h_kl c_k c_l + h_lk c_l c_k) with h_lk = -h_kl
      h_op += cxd(0, 0.25) * hkl * (cs[k] * cs[l] - cs[l] * cs[k]);
    }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h_op);
  VectorXcd vac = VectorXcd::Zero(dim);
  vac[0] = 1.0;
  VectorXcd coeffs = es.eigenvectors().adjoint() * vac;
  for (Index i = 0; i < dim; ++i) coeffs[i] *= std::exp(cxd(0, -es.eigenvalues()[i]));
  const VectorXcd psi = es.eigenvectors() * coeffs;
  return sector_isometry(d, FockSector::Even).matrix.transpose() * psi;
}

}  // namespace detail

inline VectorXcd random_class_member(const StateClass& cls, RandomStream& stream) {
  validate(cls);
  switch (cls.kind) {
    case ClassKind::Separable:
      return detail::random_separable_member(cls.d, cls.L, stream);
    case ClassKind::Bosonic:
      return detail::random_bosonic_member(cls.d, cls.L, stream,
                                           sym_isometry(cls.d, cls.L).matrix);
    case ClassKind::Slater:
      return detail::random_slater_member(cls.d, cls.L, stream);
    case ClassKind::Gaussian:
      return detail::random_gaussian_member(cls.d, stream);
  }
  throw validation_error("unknown class");
}

// Mixture of k random class members with Dirichlet(1,..,1) weights.
inline DensityMatrix random_mixture(const StateClass& cls, int k, RandomStream& stream) {
  if (k < 1) throw validation_error("mixture needs at least one component");
  const Index n = dim_space(cls);
  VectorXd w(k);
  for (int i = 0; i < k; ++i) w[i] = -std::log(1.0 - stream.uniform01());
  w /= w.sum();
  MatrixXcd rho = MatrixXcd::Zero(n, n);
  for (int i = 0; i < k; ++i) {
    const VectorXcd psi = random_class_member(cls, stream);
    rho += w[i] * (psi * psi.adjoint());
  }
  return {cls, std::move(rho)};
}

}  // namespace isocorr
