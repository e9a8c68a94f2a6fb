#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "isocorr/common.hpp"
#include "isocorr/spaces.hpp"

namespace isocorr {

// ---------------------------------------------------------------------------
// Sums of signed factor permutations acting on (C^d)^{tensor m}.
//
// A permutation pi acts by (P_pi v)[j_1..j_m] = v[j_{pi(1)}..j_{pi(m)}], with
// the first factor as the most significant index digit. Operator products
// compose as (pi o sigma)(l) = pi(sigma(l)), the right factor acting first.

class PermutationSum {
 public:
  struct Term {
    cxd coeff;
    std::vector<int> perm;  // 0-based factor permutation
  };

  PermutationSum(int factor_dim, int factor_count)
      : d_(factor_dim), m_(factor_count), dim_(pow_index(factor_dim, factor_count)) {}

  static PermutationSum identity(int factor_dim, int factor_count) {
    PermutationSum p(factor_dim, factor_count);
    std::vector<int> id(factor_count);
    std::iota(id.begin(), id.end(), 0);
    p.add_term(1.0, std::move(id));
    return p;
  }

  void add_term(cxd coeff, std::vector<int> perm) {
    if (static_cast<int>(perm.size()) != m_)
      throw validation_error("permutation sum: wrong permutation length");
    terms_.push_back({coeff, std::move(perm)});
  }

  PermutationSum scaled(cxd s) const {
    PermutationSum out(d_, m_);
    for (const auto& t : terms_) out.add_term(s * t.coeff, t.perm);
    return out;
  }

  PermutationSum plus(const PermutationSum& other) const {
    require_same_shape(other);
    PermutationSum out(d_, m_);
    for (const auto& t : terms_) out.add_term(t.coeff, t.perm);
    for (const auto& t : other.terms_) out.add_term(t.coeff, t.perm);
    out.combine_terms();
    return out;
  }

  // Operator product: this * other, other applied first.
  PermutationSum times(const PermutationSum& other) const {
    require_same_shape(other);
    PermutationSum out(d_, m_);
    std::vector<int> comp(m_);
    for (const auto& a : terms_)
      for (const auto& b : other.terms_) {
        for (int l = 0; l < m_; ++l) comp[l] = a.perm[b.perm[l]];
        out.add_term(a.coeff * b.coeff, comp);
      }
    out.combine_terms();
    return out;
  }

  void combine_terms() {
    std::map<std::vector<int>, cxd> acc;
    for (const auto& t : terms_) acc[t.perm] += t.coeff;
    terms_.clear();
    for (auto& [perm, coeff] : acc)
      if (std::abs(coeff) > 0.0) terms_.push_back({coeff, perm});
  }

  VectorXcd apply(const VectorXcd& v) const {
    if (v.size() != dim_) throw validation_error("permutation sum: dimension mismatch");
    VectorXcd out = VectorXcd::Zero(dim_);
    std::vector<Index> stride(m_);
    std::vector<int> digits(m_);
    for (const auto& t : terms_) {
      // input index = sum_k digit_k * d^(m-1-inv(k))
      std::vector<int> inv(m_);
      for (int l = 0; l < m_; ++l) inv[t.perm[l]] = l;
      for (int k = 0; k < m_; ++k) stride[k] = pow_index(d_, m_ - 1 - inv[k]);
      for (Index j = 0; j < dim_; ++j) {
        Index rem = j, src = 0;
        for (int k = m_ - 1; k >= 0; --k) {
          src += (rem % d_) * stride[k];
          rem /= d_;
        }
        out[j] += t.coeff * v[src];
      }
    }
    return out;
  }

  MatrixXcd dense() const {
    MatrixXcd out = MatrixXcd::Zero(dim_, dim_);
    std::vector<Index> stride(m_);
    for (const auto& t : terms_) {
      std::vector<int> inv(m_);
      for (int l = 0; l < m_; ++l) inv[t.perm[l]] = l;
      for (int k = 0; k < m_; ++k) stride[k] = pow_index(d_, m_ - 1 - inv[k]);
      for (Index j = 0; j < dim_; ++j) {
        Index rem = j, src = 0;
        for (int k = m_ - 1; k >= 0; --k) {
          src += (rem % d_) * stride[k];
          rem /= d_;
        }
        out(j, src) += t.coeff;
      }
    }
    return out;
  }

  Index dim() const { return dim_; }
  int factor_dim() const { return d_; }
  int factor_count() const { return m_; }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  void require_same_shape(const PermutationSum& other) const {
    if (d_ != other.d_ || m_ != other.m_)
      throw validation_error("permutation sum: factor shape mismatch");
  }

  int d_, m_;
  Index dim_;
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// A Hermitian-capable operator held either dense or as a permutation sum.

class LinearOperator {
 public:
  static LinearOperator from_dense(MatrixXcd m, bool hermitian) {
    if (m.rows() != m.cols()) throw validation_error("operator must be square");
    LinearOperator op;
    op.dim_ = m.rows();
    op.rep_ = std::move(m);
    op.hermitian_ = hermitian;
    return op;
  }

  static LinearOperator from_permutation_sum(PermutationSum p, bool hermitian) {
    LinearOperator op;
    op.dim_ = p.dim();
    op.rep_ = std::move(p);
    op.hermitian_ = hermitian;
    return op;
  }

  Index dim() const { return dim_; }
  bool hermitian() const { return hermitian_; }
  bool is_dense() const { return std::holds_alternative<MatrixXcd>(rep_); }

  VectorXcd apply(const VectorXcd& v) const {
    if (v.size() != dim_) throw validation_error("operator apply: dimension mismatch");
    if (is_dense()) return std::get<MatrixXcd>(rep_) * v;
    return std::get<PermutationSum>(rep_).apply(v);
  }

  MatrixXcd dense() const {
    if (is_dense()) return std::get<MatrixXcd>(rep_);
    return std::get<PermutationSum>(rep_).dense();
  }

  const PermutationSum& permutation_sum() const {
    if (is_dense()) throw validation_error("operator has no permutation-sum form");
    return std::get<PermutationSum>(rep_);
  }

 private:
  Index dim_ = 0;
  std::variant<MatrixXcd, PermutationSum> rep_;
  bool hermitian_ = false;
};

// ---------------------------------------------------------------------------
// Two-copy projectors on C^N tensor C^N.

inline PermutationSum swap_permutation(Index n) {
  PermutationSum tau(static_cast<int>(n), 2);
  tau.add_term(1.0, {1, 0});
  return tau;
}

inline LinearOperator swap_operator(Index n) {
  return LinearOperator::from_permutation_sum(swap_permutation(n), true);
}

inline PermutationSum sym2_permutation(Index n, double sign) {
  PermutationSum p(static_cast<int>(n), 2);
  p.add_term(0.5, {0, 1});
  p.add_term(0.5 * sign, {1, 0});
  return p;
}

inline LinearOperator projector_sym2(Index n) {
  return LinearOperator::from_permutation_sum(sym2_permutation(n, +1.0), true);
}

inline LinearOperator projector_asym2(Index n) {
  return LinearOperator::from_permutation_sum(sym2_permutation(n, -1.0), true);
}

// Applies (v + s * tau v)/2 on C^N tensor C^N without building the projector.
inline VectorXcd apply_sym2_part(const VectorXcd& v, Index n, double sign) {
  VectorXcd out(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      out[i * n + j] = 0.5 * (v[i * n + j] + sign * v[j * n + i]);
  return out;
}

// ---------------------------------------------------------------------------
// Building blocks in the 2L-factor space (C^d)^{tensor 2L}. Factors 1..L hold
// the first copy, factors L+1..2L the primed copy.

// P+_{ii'} = (I + SWAP_{i,i'})/2, i in 1..L.
inline LinearOperator pair_symmetrizer(int d, int L, int i) {
  if (i < 1 || i > L) throw validation_error("pair_symmetrizer: index out of range");
  PermutationSum p(d, 2 * L);
  std::vector<int> id(2 * L), sw(2 * L);
  std::iota(id.begin(), id.end(), 0);
  sw = id;
  std::swap(sw[i - 1], sw[L + i - 1]);
  p.add_term(0.5, id);
  p.add_term(0.5, sw);
  return LinearOperator::from_permutation_sum(std::move(p), true);
}

enum class BlockCharacter { Sym, Asym };

// (1/|S|) sum over permutations of the designated factor block, with the sign
// character for Asym. Indices are 1-based positions in 1..2L.
inline LinearOperator block_symmetrizer(int d, int L, std::span<const int> indices,
                                        BlockCharacter character) {
  const int m = 2 * L;
  for (int idx : indices)
    if (idx < 1 || idx > m) throw validation_error("block_symmetrizer: index out of range");
  const int b = static_cast<int>(indices.size());
  PermutationSum p(d, m);
  std::vector<int> sigma(b);
  std::iota(sigma.begin(), sigma.end(), 0);
  const double inv_count = 1.0 / detail::factorial(b);
  do {
    int parity = 1;
    for (int a = 0; a < b; ++a)
      for (int c = a + 1; c < b; ++c)
        if (sigma[a] > sigma[c]) parity = -parity;
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 0; k < b; ++k) perm[indices[k] - 1] = indices[sigma[k]] - 1;
    p.add_term(inv_count * (character == BlockCharacter::Asym ? parity : 1), std::move(perm));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return LinearOperator::from_permutation_sum(std::move(p), true);
}

inline std::vector<int> first_block_indices(int L) {
  std::vector<int> v(L);
  std::iota(v.begin(), v.end(), 1);
  return v;
}

inline std::vector<int> second_block_indices(int L) {
  std::vector<int> v(L);
  std::iota(v.begin(), v.end(), L + 1);
  return v;
}

// Full symmetrizer over all 2L factors: the projector onto the subspace
// invariant under every pair swap and every block permutation at once (the
// group those generate is the whole symmetric group on 2L letters).
inline PermutationSum total_symmetrizer(int d, int m) {
  PermutationSum p(d, m);
  std::vector<int> sigma(m);
  std::iota(sigma.begin(), sigma.end(), 0);
  const double w = 1.0 / detail::factorial(m);
  do {
    p.add_term(w, sigma);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return p;
}

namespace detail {

// The subtracted term of A for each tensor-embedded class, as a permutation
// sum on (C^d)^{tensor 2L}, together with its scalar prefactor.
inline std::pair<PermutationSum, double> a_second_term(const StateClass& c) {
  const int d = c.d, L = c.L;
  switch (c.kind) {
    case ClassKind::Separable: {
      PermutationSum t = PermutationSum::identity(d, 2 * L);
      for (int i = 1; i <= L; ++i)
        t = t.times(pair_symmetrizer(d, L, i).permutation_sum());
      return {std::move(t), 1.0};
    }
    case ClassKind::Bosonic:
      return {total_symmetrizer(d, 2 * L), 1.0};
    case ClassKind::Slater: {
      PermutationSum t = PermutationSum::identity(d, 2 * L);
      for (int i = 1; i <= L; ++i)
        t = t.times(pair_symmetrizer(d, L, i).permutation_sum());
      const auto blk1 = first_block_indices(L);
      const auto blk2 = second_block_indices(L);
      t = t.times(block_symmetrizer(d, L, blk1, BlockCharacter::Asym).permutation_sum());
      t = t.times(block_symmetrizer(d, L, blk2, BlockCharacter::Asym).permutation_sum());
      return {std::move(t), std::pow(2.0, L) / (L + 1)};
    }
    case ClassKind::Gaussian:
      throw validation_error("gaussian class has no permutation-sum form");
  }
  throw validation_error("unknown class");
}

inline MatrixXd class_embedding(const StateClass& c, const BuildOptions& opt) {
  switch (c.kind) {
    case ClassKind::Separable:
      return MatrixXd::Identity(pow_index(c.d, c.L), pow_index(c.d, c.L));
    case ClassKind::Bosonic: return sym_isometry(c.d, c.L, opt).matrix;
    case ClassKind::Slater: return wedge_isometry(c.d, c.L, opt).matrix;
    case ClassKind::Gaussian:
      throw validation_error("gaussian class has no tensor embedding");
  }
  throw validation_error("unknown class");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Majorana operators and the pairing operator for the Gaussian class.

// 2d Hermitian operators on the full 2^d Fock space, {c_k, c_l} = 2 delta_kl.
// Built from Jordan-Wigner ladder operators with the string sign over the
// modes preceding k (mode 1 being the most significant bit).
inline std::vector<MatrixXcd> majorana_ops(int d) {
  if (d < 1 || d > 12) throw resource_error("majorana_ops: d out of range for dense build");
  const Index dim = Index{1} << d;
  std::vector<MatrixXcd> cs;
  cs.reserve(2 * d);
  for (int k = 0; k < d; ++k) {
    MatrixXcd a = MatrixXcd::Zero(dim, dim);
    const std::uint32_t mask = 1u << (d - 1 - k);
    for (std::uint32_t s = 0; s < (1u << d); ++s) {
      if (!(s & mask)) continue;
      int string_sign = 1;
      for (int j = 0; j < k; ++j)
        if (s & (1u << (d - 1 - j))) string_sign = -string_sign;
      a(s ^ mask, s) = string_sign;
    }
    const MatrixXcd adag = a.adjoint();
    cs.push_back(a + adag);
    cs.push_back(cxd(0, 1) * (a - adag));
  }
  return cs;
}

// Lambda = sum_i c_i tensor c_i on Fock tensor Fock; maps the even-even
// sector into odd-odd.
inline MatrixXcd lambda_operator(int d) {
  const auto cs = majorana_ops(d);
  const Index dim = Index{1} << d;
  MatrixXcd lam = MatrixXcd::Zero(dim * dim, dim * dim);
  for (const auto& c : cs) lam += kron(c, c);
  return lam;
}

// Orthogonal projector onto the span of eigenvectors with |eigenvalue| below
// rel_tol * max|eigenvalue|. The operator must be Hermitian.
inline MatrixXcd kernel_projector(const MatrixXcd& op, double rel_tol = 1e-9) {
  if (hermiticity_error(op) > 1e-8)
    throw validation_error("kernel_projector: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op);
  if (es.info() != Eigen::Success)
    throw numeric_error("kernel_projector: eigensolve failed");
  const VectorXd evals = es.eigenvalues();
  const double scale = evals.cwiseAbs().maxCoeff();
  const double cut = rel_tol * std::max(scale, 1e-300);
  MatrixXcd p = MatrixXcd::Zero(op.rows(), op.cols());
  if (scale <= 0.0) return MatrixXcd::Identity(op.rows(), op.cols());
  for (Index i = 0; i < evals.size(); ++i)
    if (std::abs(evals[i]) < cut) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return p;
}

// ---------------------------------------------------------------------------
// The class projector A on (physical space) tensor (physical space).

struct ProjectorA {
  StateClass cls;
  Index phys_dim = 0;
  MatrixXcd matrix;  // dense, (N^2) x (N^2)
  double trace = 0.0;
};

namespace detail {

inline MatrixXcd gaussian_a_matrix(int d, const BuildOptions& opt) {
  if ((Index{1} << (2 * d)) > 4096)
    throw resource_error("gaussian dense build limited to d <= 6");
  const MatrixXcd lam = lambda_operator(d);
  const MatrixXd e2 = Eigen::kroneckerProduct(sector_isometry(d, FockSector::Even).matrix,
                                              sector_isometry(d, FockSector::Even).matrix).eval();
  const MatrixXcd lam_e = lam * e2;
  const MatrixXcd gram = lam_e.adjoint() * lam_e;  // Lambda^dag Lambda on even-even
  const Index n = Index{1} << (d - 1);
  // Compress to Sym^2 of the even sector; the kernel of the compressed PSD
  // operator is exactly ker(Lambda) within Sym^2.
  const MatrixXd s = sym_isometry(static_cast<int>(n), 2, opt).matrix;
  const MatrixXcd gram_sym = s.transpose() * gram * s;
  const MatrixXcd p0 = s * kernel_projector(gram_sym, opt.tol.kernel_rel) * s.transpose();
  return sym2_permutation(n, +1.0).dense() - p0;
}

}  // namespace detail

inline ProjectorA build_a(const StateClass& c, const BuildOptions& opt = {}) {
  validate(c);
  check_witness_space_cap(c, opt);

  ProjectorA out;
  out.cls = c;
  out.phys_dim = dim_space(c);

  if (c.kind == ClassKind::Gaussian) {
    out.matrix = detail::gaussian_a_matrix(c.d, opt);
  } else {
    if (pow_index(c.d, 2 * c.L) > 4096)
      throw resource_error("dense build limited to d^(2L) <= 4096; use the matrix-free path");
    auto [term, scale] = detail::a_second_term(c);
    const MatrixXcd term_dense = term.dense();
    const MatrixXd j = detail::class_embedding(c, opt);
    const MatrixXd j2 = Eigen::kroneckerProduct(j, j).eval();
    const MatrixXcd compressed = j2.transpose() * term_dense * j2;
    out.matrix = sym2_permutation(out.phys_dim, +1.0).dense() - scale * compressed;
  }
  out.trace = out.matrix.trace().real();
  return out;
}

// V = A - P^asym on the squared physical space.
inline MatrixXcd build_v(const ProjectorA& a) {
  return a.matrix - sym2_permutation(a.phys_dim, -1.0).dense();
}

// ---------------------------------------------------------------------------
// Matrix-free application of A for the tensor-embedded classes: no dense A,
// only the embedding and the permutation-sum second term.

class MatrixFreeA {
 public:
  explicit MatrixFreeA(const StateClass& c, const BuildOptions& opt = {})
      : cls_(c),
        phys_dim_(dim_space(c)),
        second_(detail::a_second_term(c)),
        embed_(c.kind == ClassKind::Separable ? MatrixXd()
                                              : detail::class_embedding(c, opt)) {}

  Index dim() const { return phys_dim_ * phys_dim_; }

  VectorXcd apply(const VectorXcd& v) const {
    if (v.size() != dim()) throw validation_error("matrix-free A: dimension mismatch");
    const Index n = phys_dim_;
    VectorXcd out = apply_sym2_part(v, n, +1.0);
    const auto& [term, scale] = second_;
    if (embed_.size() == 0) {
      // The 2L-factor space and C^N tensor C^N share one index ordering.
      out -= scale * term.apply(v);
      return out;
    }
    // v indexed as (i,j) -> i*n+j; lift through J on both slots, push the
    // permutation sum, compress back.
    const Index full = embed_.rows();
    MatrixXcd x(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) x(i, j) = v[i * n + j];
    const MatrixXcd lifted = embed_ * x * embed_.transpose();
    VectorXcd big(full * full);
    for (Index a = 0; a < full; ++a)
      for (Index b = 0; b < full; ++b) big[a * full + b] = lifted(a, b);
    const VectorXcd pushed = term.apply(big);
    MatrixXcd pushed_mat(full, full);
    for (Index a = 0; a < full; ++a)
      for (Index b = 0; b < full; ++b) pushed_mat(a, b) = pushed[a * full + b];
    const MatrixXcd small = embed_.transpose() * pushed_mat * embed_;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) out[i * n + j] -= scale * small(i, j);
    return out;
  }

 private:
  StateClass cls_;
  Index phys_dim_;
  std::pair<PermutationSum, double> second_;
  MatrixXd embed_;  // empty for separable (identity embedding)
};

}  // namespace isocorr
