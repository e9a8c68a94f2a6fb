#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "isocorr/common.hpp"

namespace isocorr {

enum class ClassKind { Separable, Bosonic, Slater, Gaussian };

// Which family of uncorrelated pure states an operator or state refers to.
// d = single-particle dimension (number of modes for Gaussian), L = particle
// count (unused for Gaussian).
struct StateClass {
  ClassKind kind;
  int d = 0;
  int L = 0;

  bool operator==(const StateClass&) const = default;
};

inline StateClass separable_class(int d, int L) { return {ClassKind::Separable, d, L}; }
inline StateClass bosonic_class(int d, int L) { return {ClassKind::Bosonic, d, L}; }
inline StateClass slater_class(int d, int L) { return {ClassKind::Slater, d, L}; }
inline StateClass gaussian_class(int d) { return {ClassKind::Gaussian, d, 0}; }

inline std::string kind_name(ClassKind k) {
  switch (k) {
    case ClassKind::Separable: return "separable";
    case ClassKind::Bosonic: return "bosonic";
    case ClassKind::Slater: return "slater";
    case ClassKind::Gaussian: return "gaussian";
  }
  return "?";
}

inline std::string to_string(const StateClass& c) {
  if (c.kind == ClassKind::Gaussian)
    return kind_name(c.kind) + "{d=" + std::to_string(c.d) + "}";
  return kind_name(c.kind) + "{d=" + std::to_string(c.d) + ",L=" + std::to_string(c.L) + "}";
}

inline void validate(const StateClass& c) {
  if (c.d < 1) throw validation_error("state class: d must be >= 1");
  if (c.kind != ClassKind::Gaussian && c.L < 1)
    throw validation_error("state class: L must be >= 1");
  if (c.kind == ClassKind::Slater && c.L > c.d)
    throw validation_error("state class: slater requires L <= d");
}

// Exact for every argument this library meets; both operands stay far below 2^63.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

inline Index pow_index(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Dimension of the physical Hilbert space carrying density matrices for the
// class (the even-parity Fock sector for Gaussian).
inline Index dim_space(const StateClass& c) {
  validate(c);
  switch (c.kind) {
    case ClassKind::Separable: return pow_index(c.d, c.L);
    case ClassKind::Bosonic: return static_cast<Index>(binomial(c.d + c.L - 1, c.L));
    case ClassKind::Slater: return static_cast<Index>(binomial(c.d, c.L));
    case ClassKind::Gaussian: return Index{1} << (c.d - 1);
  }
  return 0;
}

inline Index dim_sym2(Index n) { return n * (n + 1) / 2; }

inline void check_witness_space_cap(const StateClass& c, const BuildOptions& opt = {}) {
  const double s = static_cast<double>(dim_sym2(dim_space(c)));
  if (16.0 * s * s > opt.memory_cap_bytes)
    throw resource_error("witness space for " + to_string(c) +
                         " exceeds the dense memory cap");
}

// ---------------------------------------------------------------------------
// Named basis spaces. Ordering conventions: FullTensor uses lexicographic
// multi-indices with the first factor most significant; Sym is ordered by
// sorted multisets, Wedge by strictly increasing tuples, Fock by occupation
// bitstrings read as unsigned integers with mode 1 as the most significant
// bit.

enum class SpaceKind { FullTensor, Sym, Wedge, FockEven, FockFull };

struct BasisSpec {
  SpaceKind space;
  int d = 0;
  int L = 0;  // unused for the Fock kinds

  bool operator==(const BasisSpec&) const = default;
};

inline Index dim(const BasisSpec& b) {
  switch (b.space) {
    case SpaceKind::FullTensor: return pow_index(b.d, b.L);
    case SpaceKind::Sym: return static_cast<Index>(binomial(b.d + b.L - 1, b.L));
    case SpaceKind::Wedge: return static_cast<Index>(binomial(b.d, b.L));
    case SpaceKind::FockEven: return Index{1} << (b.d - 1);
    case SpaceKind::FockFull: return Index{1} << b.d;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Fock occupation basis. Mode 1 is the most significant bit, so the fixed
// ordering is just ascending unsigned integers.

enum class FockSector { Even, Odd, Full };

inline std::vector<std::uint32_t> fock_basis(int d, FockSector sector) {
  if (d < 1 || d > 20) throw validation_error("fock_basis: d out of range");
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < (1u << d); ++s) {
    const bool even = (std::popcount(s) % 2) == 0;
    if (sector == FockSector::Full || (sector == FockSector::Even) == even)
      out.push_back(s);
  }
  return out;
}

inline std::string fock_string(std::uint32_t s, int d) {
  std::string str(d, '0');
  for (int k = 0; k < d; ++k)
    if (s & (1u << (d - 1 - k))) str[k] = '1';
  return str;
}

// ---------------------------------------------------------------------------
// Isometric embeddings: J^T J = I on the source space. Columns follow the
// source ordering convention; entries are real by construction.

struct Isometry {
  BasisSpec source;
  BasisSpec target;
  MatrixXd matrix;  // dim(target) x dim(source)

  Index source_dim() const { return matrix.cols(); }
  Index target_dim() const { return matrix.rows(); }
};

// 2^d x 2^(d-1) embedding of the chosen parity sector into the full Fock space.
inline Isometry sector_isometry(int d, FockSector sector) {
  const auto basis = fock_basis(d, sector);
  MatrixXd e = MatrixXd::Zero(Index{1} << d, static_cast<Index>(basis.size()));
  for (Index c = 0; c < static_cast<Index>(basis.size()); ++c) e(basis[c], c) = 1.0;
  return {{sector == FockSector::Even ? SpaceKind::FockEven : SpaceKind::FockFull, d, 0},
          {SpaceKind::FockFull, d, 0},
          std::move(e)};
}

namespace detail {

inline void for_each_permutation(int L, const std::function<void(const std::vector<int>&, int)>& fn) {
  std::vector<int> sigma(L);
  std::iota(sigma.begin(), sigma.end(), 0);
  do {
    int parity = 1;
    for (int a = 0; a < L; ++a)
      for (int b = a + 1; b < L; ++b)
        if (sigma[a] > sigma[b]) parity = -parity;
    fn(sigma, parity);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
}

inline double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace detail

inline Isometry sym_isometry(int d, int L, const BuildOptions& opt = {}) {
  check_witness_space_cap(bosonic_class(d, L), opt);
  std::vector<std::vector<int>> multisets;
  std::vector<int> cur(L, 0);
  // lexicographic nondecreasing tuples
  const std::function<void(int, int)> rec = [&](int pos, int lo) {
    if (pos == L) {
      multisets.push_back(cur);
      return;
    }
    for (int i = lo; i < d; ++i) {
      cur[pos] = i;
      rec(pos + 1, i);
    }
  };
  rec(0, 0);

  const Index full = pow_index(d, L);
  MatrixXd j = MatrixXd::Zero(full, static_cast<Index>(multisets.size()));
  for (Index c = 0; c < static_cast<Index>(multisets.size()); ++c) {
    const auto& ms = multisets[c];
    double mult = 1.0;
    int run = 1;
    for (int i = 1; i < L; ++i) {
      if (ms[i] == ms[i - 1]) {
        ++run;
      } else {
        mult *= detail::factorial(run);
        run = 1;
      }
    }
    mult *= detail::factorial(run);
    const double norm = std::sqrt(detail::factorial(L) * mult);
    detail::for_each_permutation(L, [&](const std::vector<int>& sigma, int) {
      Index idx = 0;
      for (int k = 0; k < L; ++k) idx = idx * d + ms[sigma[k]];
      j(idx, c) += 1.0 / norm;
    });
  }
  return {{SpaceKind::Sym, d, L}, {SpaceKind::FullTensor, d, L}, std::move(j)};
}

inline Isometry wedge_isometry(int d, int L, const BuildOptions& opt = {}) {
  if (L > d) throw validation_error("wedge_isometry: L must be <= d");
  check_witness_space_cap(slater_class(d, L), opt);
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur(L);
  const std::function<void(int, int)> rec = [&](int pos, int lo) {
    if (pos == L) {
      tuples.push_back(cur);
      return;
    }
    for (int i = lo; i < d; ++i) {
      cur[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);

  const Index full = pow_index(d, L);
  MatrixXd j = MatrixXd::Zero(full, static_cast<Index>(tuples.size()));
  const double norm = std::sqrt(detail::factorial(L));
  for (Index c = 0; c < static_cast<Index>(tuples.size()); ++c) {
    const auto& tp = tuples[c];
    detail::for_each_permutation(L, [&](const std::vector<int>& sigma, int parity) {
      Index idx = 0;
      for (int k = 0; k < L; ++k) idx = idx * d + tp[sigma[k]];
      j(idx, c) += parity / norm;
    });
  }
  return {{SpaceKind::Wedge, d, L}, {SpaceKind::FullTensor, d, L}, std::move(j)};
}

// Ordered increasing index tuples matching wedge_isometry's column order.
inline std::vector<std::vector<int>> wedge_tuples(int d, int L) {
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur(L);
  const std::function<void(int, int)> rec = [&](int pos, int lo) {
    if (pos == L) {
      tuples.push_back(cur);
      return;
    }
    for (int i = lo; i < d; ++i) {
      cur[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return tuples;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline VectorXcd kron_vec(const VectorXcd& a, const VectorXcd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

}  // namespace isocorr
