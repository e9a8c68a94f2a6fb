#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "isocorr/common.hpp"
#include "isocorr/operators.hpp"
#include "isocorr/sampling.hpp"
#include "isocorr/spaces.hpp"
#include "isocorr/witness.hpp"

namespace isocorr {

// Closed-form orbit parameters for a class.
struct Table1Row {
  Index n = 0;
  double one_minus_x = 0.0;

  double x() const { return 1.0 - one_minus_x; }
  double p_cr() const { return one_minus_x / (2.0 - one_minus_x); }  // (1-X)/(1+X)
};

// Analytic 1-X = dim ker(A|Sym^2) / dim Sym^2 for each class:
//   separable: 2^(1-L) (d+1)^L / (d^L + 1)
//   bosonic:   2 C(d+2L-1, 2L) / (N(N+1))      (span of phi^{x2L} inside Sym^2)
//   slater:    (2 C(d,L)/(C(d,L)+1)) (d+1)/((L+1)(d+1-L))
//   gaussian:  C(2d, d) / ((2^(d-1)+1) 2^(d-1))
inline Table1Row table1_parameters(const StateClass& c) {
  validate(c);
  const Index n = dim_space(c);
  double omx = 0.0;
  switch (c.kind) {
    case ClassKind::Separable: {
      omx = std::pow(2.0, 1 - c.L) * std::pow(c.d + 1.0, c.L) /
            (std::pow(static_cast<double>(c.d), c.L) + 1.0);
      break;
    }
    case ClassKind::Bosonic: {
      const double nn = static_cast<double>(n);
      omx = 2.0 * static_cast<double>(binomial(c.d + 2 * c.L - 1, 2 * c.L)) / (nn * (nn + 1.0));
      break;
    }
    case ClassKind::Slater: {
      const double nf = static_cast<double>(binomial(c.d, c.L));
      omx = (2.0 * nf / (nf + 1.0)) * (c.d + 1.0) /
            (static_cast<double>(c.L + 1) * (c.d + 1 - c.L));
      break;
    }
    case ClassKind::Gaussian: {
      const double half = std::pow(2.0, c.d - 1);
      omx = static_cast<double>(binomial(2 * c.d, c.d)) / ((half + 1.0) * half);
      break;
    }
  }
  return {n, omx};
}

// X = tr(A) / dim Sym^2(H); valid because A is an orthogonal projector.
inline double numeric_x(const ProjectorA& a) {
  return a.trace / static_cast<double>(dim_sym2(a.phys_dim));
}

// Lower bound on the orbit measure of witness-detected states,
// 1 - exp(-N delta^2 (X+1)^2 / 64); 0 (inapplicable) when delta <= 0.
inline double concentration_bound(Index n, double x, double delta) {
  if (delta <= 0.0) return 0.0;
  const double expo = static_cast<double>(n) * delta * delta * (x + 1.0) * (x + 1.0) / 64.0;
  return 1.0 - std::exp(-expo);
}

struct OrbitParameters {
  StateClass cls;
  Index n = 0;
  double x = 0.0;
  double p_cr = 0.0;
  double purity = 0.0;
  double delta = 0.0;  // purity - p_cr
  double bound = 0.0;
  bool bound_applicable = false;
};

inline OrbitParameters orbit_parameters(const StateClass& c, const Spectrum& spec) {
  const Table1Row row = table1_parameters(c);
  if (spec.size() != row.n)
    throw validation_error("spectrum length does not match class dimension");
  OrbitParameters out;
  out.cls = c;
  out.n = row.n;
  out.x = row.x();
  out.p_cr = row.p_cr();
  out.purity = spec.purity();
  out.delta = out.purity - out.p_cr;
  out.bound_applicable = out.delta > 0.0;
  out.bound = concentration_bound(row.n, out.x, out.delta);
  return out;
}

// Haar average of f over the orbit: E[f] = (X+1)(purity - P_cr)/2. Follows
// from the two-copy twirl E[rho x rho] = ((1+P)/2) P^sym/dimSym + ((1-P)/2)
// P^asym/dimAsym; validated against Monte Carlo in the test suite before use.
inline double orbit_mean_f(const OrbitParameters& p) {
  return 0.5 * (p.x + 1.0) * (p.purity - p.p_cr);
}

struct FractionEstimate {
  StateClass cls;
  Spectrum spec;
  std::int64_t n_samples = 0;
  std::int64_t n_correlated = 0;
  double fraction = 0.0;
  double std_err = 0.0;
  double bound = 0.0;
  bool bound_applicable = false;
  double mean_f_empirical = 0.0;
  double mean_f_analytic = 0.0;
  OrbitParameters params;
  std::uint64_t seed = 0;
};

// Per-sample witness values over the Haar orbit; index i uses stream
// (seed, i), so the result is independent of the thread partition.
inline std::vector<double> orbit_witness_values(const ProjectorA& a, const Spectrum& spec,
                                                std::int64_t n_samples, std::uint64_t seed,
                                                int threads = 1) {
  if (n_samples < 1) throw validation_error("need at least one sample");
  std::vector<double> fs(static_cast<std::size_t>(n_samples));
  const int workers = std::max(1, threads);
  auto worker = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      RandomStream stream(seed, static_cast<std::uint64_t>(i));
      const DensityMatrix rho = isospectral_sample(a.cls, spec, stream);
      fs[static_cast<std::size_t>(i)] = witness_value(a, rho).f;
    }
  };
  if (workers == 1) {
    worker(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n_samples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t lo = w * chunk;
      const std::int64_t hi = std::min<std::int64_t>(n_samples, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return fs;
}

inline FractionEstimate estimate_fraction(const StateClass& c, const Spectrum& spec,
                                          std::int64_t n_samples, std::uint64_t seed,
                                          int threads = 1, double decision_tol = 1e-9,
                                          const BuildOptions& opt = {}) {
  const ProjectorA a = build_a(c, opt);
  const auto fs = orbit_witness_values(a, spec, n_samples, seed, threads);

  FractionEstimate out;
  out.cls = c;
  out.spec = spec;
  out.n_samples = n_samples;
  out.seed = seed;
  out.params = orbit_parameters(c, spec);
  out.bound = out.params.bound;
  out.bound_applicable = out.params.bound_applicable;
  out.mean_f_analytic = orbit_mean_f(out.params);

  // Order-fixed reductions keep the output byte-identical across thread counts.
  double sum_f = 0.0;
  std::int64_t count = 0;
  for (double f : fs) {
    sum_f += f;
    if (f > decision_tol) ++count;
  }
  out.n_correlated = count;
  out.fraction = static_cast<double>(count) / static_cast<double>(n_samples);
  out.std_err = std::sqrt(out.fraction * (1.0 - out.fraction) /
                          static_cast<double>(n_samples));
  out.mean_f_empirical = sum_f / static_cast<double>(n_samples);
  return out;
}

}  // namespace isocorr
