#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isocorr/witness.hpp"
#include "isocorr/sampling.hpp"

using namespace isocorr;

namespace {

MatrixXcd random_density(Index n, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  MatrixXcd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = cxd(dist(rng), dist(rng));
  MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

MatrixXcd random_psd(Index n, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  MatrixXcd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = cxd(dist(rng), dist(rng));
  return g * g.adjoint();
}

}  // namespace

TEST_CASE("density matrix validation") {
  const StateClass cls = separable_class(2, 2);
  CHECK_NOTHROW(make_density_matrix(cls, MatrixXcd::Identity(4, 4) / 4.0));
  CHECK_THROWS_AS(make_density_matrix(cls, MatrixXcd::Identity(3, 3) / 3.0),
                  validation_error);
  CHECK_THROWS_AS(make_density_matrix(cls, MatrixXcd::Identity(4, 4)), validation_error);
  MatrixXcd nonpsd = MatrixXcd::Zero(4, 4);
  nonpsd(0, 0) = 1.5;
  nonpsd(1, 1) = -0.5;
  CHECK_THROWS_AS(make_density_matrix(cls, nonpsd), validation_error);
  MatrixXcd nonherm = MatrixXcd::Identity(4, 4) / 4.0;
  nonherm(0, 1) = cxd(0.1, 0.1);
  CHECK_THROWS_AS(make_density_matrix(cls, nonherm), validation_error);
}

TEST_CASE("witness value") {
  SECTION("pure class members sit at f = 0") {
    for (const auto& cls : {separable_class(2, 2), bosonic_class(2, 2),
                            slater_class(4, 2), gaussian_class(4)}) {
      const ProjectorA a = build_a(cls);
      RandomStream stream(3, 0);
      const VectorXcd psi = random_class_member(cls, stream);
      const DensityMatrix rho = make_density_matrix(cls, psi * psi.adjoint());
      INFO(to_string(cls));
      CHECK(std::abs(witness_value(a, rho).f) <= 1e-10);
      CHECK_FALSE(witness_value(a, rho).correlated);
    }
  }
  SECTION("maximally mixed two-fermion state: f = 1/36 - 15/36") {
    const ProjectorA a = build_a(slater_class(4, 2));
    const DensityMatrix rho =
        make_density_matrix(slater_class(4, 2), MatrixXcd::Identity(6, 6) / 6.0);
    const WitnessReport rep = witness_value(a, rho);
    CHECK(rep.f == Catch::Approx(-7.0 / 18.0).margin(1e-12));
    CHECK(rep.purity == Catch::Approx(1.0 / 6.0).margin(1e-14));
    CHECK_FALSE(rep.correlated);
  }
  SECTION("balanced two-fermion pure state is detected with f = 1/6") {
    // Rank-one A: f(psi) = (2 lam1 lam2)^2 / 6 at p = 0.
    const ProjectorA a = build_a(slater_class(4, 2));
    const auto schmidt = make_two_fermion_schmidt(
        4, (VectorXd(2) << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0)).finished());
    const WitnessReport rep = witness_value(a, depolarized_slater_state(schmidt, 0.0));
    CHECK(rep.f == Catch::Approx(1.0 / 6.0).margin(1e-12));
    CHECK(rep.correlated);
  }
}

TEST_CASE("bilinear witness") {
  const ProjectorA a = build_a(separable_class(2, 2));
  std::mt19937 rng(17);
  SECTION("diagonal case reproduces the quadratic witness") {
    const DensityMatrix rho = make_density_matrix(a.cls, random_density(4, rng));
    CHECK(bilinear_witness(a, rho, rho) == Catch::Approx(witness_value(a, rho).f).margin(1e-13));
  }
  SECTION("symmetric in its two arguments") {
    for (int i = 0; i < 20; ++i) {
      const DensityMatrix r1 = make_density_matrix(a.cls, random_density(4, rng));
      const DensityMatrix r2 = make_density_matrix(a.cls, random_density(4, rng));
      CHECK(bilinear_witness(a, r1, r2) ==
            Catch::Approx(bilinear_witness(a, r2, r1)).margin(1e-12));
    }
  }
  SECTION("nonpositive on pairs of mixtures") {
    double worst = -1.0;
    for (int i = 0; i < 50; ++i) {
      RandomStream s1(31, 2 * static_cast<std::uint64_t>(i));
      RandomStream s2(31, 2 * static_cast<std::uint64_t>(i) + 1);
      const DensityMatrix r1 = random_mixture(a.cls, 8, s1);
      const DensityMatrix r2 = random_mixture(a.cls, 8, s2);
      worst = std::max(worst, bilinear_witness(a, r1, r2));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("linear witness") {
  const ProjectorA a = build_a(separable_class(2, 2));
  std::mt19937 rng(23);
  SECTION("B = 0 gives 0") {
    const DensityMatrix rho = make_density_matrix(a.cls, random_density(4, rng));
    CHECK(linear_witness(a, rho, MatrixXcd::Zero(4, 4)) == 0.0);
  }
  SECTION("B = rho reproduces the quadratic witness") {
    const DensityMatrix rho = make_density_matrix(a.cls, random_density(4, rng));
    CHECK(linear_witness(a, rho, rho.rho) ==
          Catch::Approx(witness_value(a, rho).f).margin(1e-13));
  }
  SECTION("nonpositive on mixtures against random PSD operators") {
    double worst = -1.0;
    for (int i = 0; i < 50; ++i) {
      RandomStream stream(37, static_cast<std::uint64_t>(i));
      const DensityMatrix rho = random_mixture(a.cls, 10, stream);
      worst = std::max(worst, linear_witness(a, rho, random_psd(4, rng)));
    }
    CHECK(worst <= 1e-10);
  }
  SECTION("rejects a non-PSD B") {
    const DensityMatrix rho = make_density_matrix(a.cls, random_density(4, rng));
    MatrixXcd b = MatrixXcd::Identity(4, 4);
    b(2, 2) = -1.0;
    CHECK_THROWS_AS(linear_witness(a, rho, b), validation_error);
  }
}

TEST_CASE("pure membership") {
  const ProjectorA a = build_a(separable_class(2, 2));
  SECTION("product basis state is a member") {
    VectorXcd psi = VectorXcd::Zero(4);
    psi[1] = 1.0;  // e_1 tensor e_2
    CHECK(pure_membership(a, psi) <= 1e-14);
  }
  SECTION("maximally entangled state is not") {
    VectorXcd psi = VectorXcd::Zero(4);
    psi[0] = 1 / std::sqrt(2.0);
    psi[3] = 1 / std::sqrt(2.0);
    CHECK(pure_membership(a, psi) > 0.01);
  }
  SECTION("slater basis wedge is a member") {
    const ProjectorA af = build_a(slater_class(4, 2));
    VectorXcd psi = VectorXcd::Zero(6);
    psi[0] = 1.0;  // e_1 wedge e_2
    CHECK(pure_membership(af, psi) <= 1e-14);
  }
  SECTION("rejects an unnormalized vector") {
    CHECK_THROWS_AS(pure_membership(a, VectorXcd::Zero(4)), validation_error);
  }
}

TEST_CASE("correlation matrix") {
  SECTION("vacuum at d=2 is block diagonal with [[0,1],[-1,0]]") {
    MatrixXcd rho = MatrixXcd::Zero(4, 4);
    rho(0, 0) = 1.0;
    const MatrixXd m = correlation_matrix(rho, 2);
    MatrixXd expected = MatrixXd::Zero(4, 4);
    expected(0, 1) = 1;
    expected(1, 0) = -1;
    expected(2, 3) = 1;
    expected(3, 2) = -1;
    CHECK((m - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SECTION("maximally mixed state has M = 0") {
    const MatrixXcd rho = MatrixXcd::Identity(8, 8) / 8.0;
    CHECK(correlation_matrix(rho, 3).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SECTION("M is antisymmetric and M M^T = I for random pure gaussians") {
    for (int i = 0; i < 20; ++i) {
      RandomStream stream(5, static_cast<std::uint64_t>(i));
      const VectorXcd g = random_class_member(gaussian_class(3), stream);
      const MatrixXcd rho = g * g.adjoint();  // even-sector coordinates
      const MatrixXd m = correlation_matrix(rho, 3);
      CHECK((m + m.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((m * m.transpose() - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("depolarized two-fermion family") {
  const auto schmidt = make_two_fermion_schmidt(
      4, (VectorXd(2) << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0)).finished());
  SECTION("full depolarization is maximally mixed") {
    const DensityMatrix rho = depolarized_slater_state(schmidt, 1.0);
    CHECK((rho.rho - MatrixXcd::Identity(6, 6) / 6.0).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(purity(rho.rho) == Catch::Approx(1.0 / 6.0).margin(1e-14));
  }
  SECTION("p = 0 with a single coefficient is a pure slater projector") {
    const auto single = make_two_fermion_schmidt(4, (VectorXd(1) << 1.0).finished());
    const DensityMatrix rho = depolarized_slater_state(single, 0.0);
    CHECK(purity(rho.rho) == Catch::Approx(1.0).margin(1e-13));
    CHECK(idempotence_error(rho.rho) <= 1e-13);
  }
  SECTION("spectrum at p = 0.1 (eigensolve oracle)") {
    const DensityMatrix rho = depolarized_slater_state(schmidt, 0.1);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho.rho, Eigen::EigenvaluesOnly);
    VectorXd expected(6);
    expected << 0.1 / 6, 0.1 / 6, 0.1 / 6, 0.1 / 6, 0.1 / 6, 0.9 + 0.1 / 6;
    CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SECTION("parameter range and normalization are validated") {
    CHECK_THROWS_AS(depolarized_slater_state(schmidt, -0.1), validation_error);
    CHECK_THROWS_AS(depolarized_slater_state(schmidt, 1.1), validation_error);
    CHECK_THROWS_AS(make_two_fermion_schmidt(4, (VectorXd(2) << 0.9, 0.9).finished()),
                    validation_error);
  }
}

TEST_CASE("two-fermion closed-form criterion") {
  SECTION("chi values at d=4") {
    CHECK(slater_chi1(4) == 10.0 / 3.0);
    CHECK(slater_chi2(4) == 23.0 / 6.0);
  }
  SECTION("anchors at p=0") {
    const auto single = make_two_fermion_schmidt(4, (VectorXd(1) << 1.0).finished());
    const auto balanced = make_two_fermion_schmidt(
        4, (VectorXd(2) << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0)).finished());
    CHECK(slater_criterion_lhs(single, 0.0) == Catch::Approx(3.0).margin(1e-14));
    CHECK(slater_criterion_lhs(balanced, 0.0) == Catch::Approx(4.0).margin(1e-14));
  }
  SECTION("sign agreement holds exactly where the witness detects") {
    // The closed form and the numeric f agree in sign only on the small-p
    // detection region; every disagreement on the grid has LHS-3 > 0 > f and
    // is surfaced by the selftest notes rather than asserted away.
    const ProjectorA a = build_a(slater_class(4, 2));
    const std::vector<VectorXd> lamsets = {
        (VectorXd(2) << 1.0, 0.0).finished(),
        (VectorXd(2) << 0.9, std::sqrt(0.19)).finished(),
        (VectorXd(2) << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0)).finished()};
    int disagreements = 0;
    for (const auto& lams : lamsets) {
      const auto schmidt = make_two_fermion_schmidt(4, lams);
      for (int k = 0; k <= 20; ++k) {
        const double p = 0.05 * k;
        const double lhs3 = slater_criterion_lhs(schmidt, p) - 3.0;
        if (std::abs(lhs3) <= 0.05) continue;
        const double f = witness_value(a, depolarized_slater_state(schmidt, p)).f;
        if ((f > 1e-9) != (lhs3 > 0)) {
          ++disagreements;
          CHECK(lhs3 > 0.0);
          CHECK(f <= 1e-9);
        } else if (f > 1e-9) {
          CHECK(lhs3 > 0.0);
        }
      }
    }
    // the maximally mixed endpoint is among the known disagreements
    CHECK(disagreements > 0);
  }
}

TEST_CASE("purity identity validates the antisymmetric fast path") {
  std::mt19937 rng(29);
  const MatrixXcd pasym = projector_asym2(5).dense();
  for (int i = 0; i < 20; ++i) {
    const MatrixXcd rho = random_density(5, rng);
    const MatrixXcd rr = kron(rho, rho);
    const double direct = rr.cwiseProduct(pasym.transpose()).sum().real();
    const double fast = 0.5 * (1.0 - purity(rho));
    CHECK(direct == Catch::Approx(fast).margin(1e-12));
  }
}

TEST_CASE("witness is invariant under class symmetries") {
  std::mt19937 rng(31);
  SECTION("separable: local unitaries") {
    const ProjectorA a = build_a(separable_class(2, 2));
    RandomStream stream(101, 0);
    for (int i = 0; i < 10; ++i) {
      const MatrixXcd rho = random_density(4, rng);
      const MatrixXcd u = kron(haar_unitary(2, stream), haar_unitary(2, stream));
      const DensityMatrix dm = make_density_matrix(a.cls, rho);
      const DensityMatrix rotated = make_density_matrix(a.cls, u * rho * u.adjoint());
      CHECK(witness_value(a, dm).f == Catch::Approx(witness_value(a, rotated).f).margin(1e-9));
    }
  }
  SECTION("slater and bosonic: induced single-particle unitaries") {
    for (const auto& cls : {slater_class(4, 2), bosonic_class(2, 2)}) {
      const ProjectorA a = build_a(cls);
      const MatrixXd j = cls.kind == ClassKind::Slater
                             ? wedge_isometry(cls.d, cls.L).matrix
                             : sym_isometry(cls.d, cls.L).matrix;
      RandomStream stream(103, 7);
      for (int i = 0; i < 10; ++i) {
        const MatrixXcd rho = random_density(a.phys_dim, rng);
        const MatrixXcd u1 = haar_unitary(cls.d, stream);
        MatrixXcd u_big = u1;
        for (int k = 1; k < cls.L; ++k) u_big = kron(u_big, u1).eval();
        const MatrixXcd u = j.transpose() * u_big * j;  // induced action
        const DensityMatrix dm = make_density_matrix(cls, rho);
        const DensityMatrix rotated = make_density_matrix(cls, u * rho * u.adjoint());
        INFO(to_string(cls));
        CHECK(witness_value(a, dm).f ==
              Catch::Approx(witness_value(a, rotated).f).margin(1e-9));
      }
    }
  }
  SECTION("gaussian: rotations generated by quadratic majorana hamiltonians") {
    const ProjectorA a = build_a(gaussian_class(3));
    const auto cs = majorana_ops(3);
    const MatrixXd e = sector_isometry(3, FockSector::Even).matrix;
    RandomStream stream(107, 3);
    for (int i = 0; i < 5; ++i) {
      const MatrixXcd rho = random_density(4, rng);
      MatrixXcd h = MatrixXcd::Zero(8, 8);
      for (int k = 0; k < 6; ++k)
        for (int l = k + 1; l < 6; ++l)
          h += cxd(0, 0.25) * stream.normal() * (cs[k] * cs[l] - cs[l] * cs[k]);
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
      MatrixXcd u_full = es.eigenvectors();
      MatrixXcd phases = MatrixXcd::Zero(8, 8);
      for (Index k = 0; k < 8; ++k) phases(k, k) = std::exp(cxd(0, -es.eigenvalues()[k]));
      u_full = u_full * phases * es.eigenvectors().adjoint();
      const MatrixXcd u = e.transpose() * u_full * e;  // parity preserved
      const DensityMatrix dm = make_density_matrix(a.cls, rho);
      const DensityMatrix rotated = make_density_matrix(a.cls, u * rho * u.adjoint());
      CHECK(witness_value(a, dm).f ==
            Catch::Approx(witness_value(a, rotated).f).margin(1e-9));
    }
  }
}

TEST_CASE("matrix-free witness value matches the dense evaluation") {
  std::mt19937 rng(41);
  for (const auto& cls : {separable_class(2, 2), slater_class(4, 2)}) {
    const ProjectorA a = build_a(cls);
    const MatrixFreeA mf(cls);
    for (int i = 0; i < 5; ++i) {
      const DensityMatrix rho = make_density_matrix(cls, random_density(a.phys_dim, rng));
      INFO(to_string(cls));
      CHECK(witness_value_matrix_free(mf, rho) ==
            Catch::Approx(witness_value(a, rho).f).margin(1e-10));
    }
  }
}
