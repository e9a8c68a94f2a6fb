#include <catch2/catch_amalgamated.hpp>

#include "isocorr/sampling.hpp"
#include "isocorr/witness.hpp"

using namespace isocorr;

TEST_CASE("spectrum validation") {
  CHECK_THROWS_AS(make_spectrum((VectorXd(2) << 0.6, 0.6).finished()), validation_error);
  CHECK_THROWS_AS(make_spectrum((VectorXd(2) << 1.2, -0.2).finished()), validation_error);
  const Spectrum s = make_spectrum((VectorXd(3) << 0.5, 0.2, 0.3).finished());
  CHECK(s.p[0] == 0.2);  // stored ascending
  CHECK(s.p[2] == 0.5);
  CHECK(s.purity() == Catch::Approx(0.38));
  const Spectrum dep = depolarized_spectrum(4, 0.2);
  CHECK(dep.p[3] == Catch::Approx(0.85));
  CHECK(dep.p[0] == Catch::Approx(0.05));
}

TEST_CASE("random streams are reproducible and order independent") {
  RandomStream a(12345, 7), b(12345, 7), c(12345, 8);
  std::vector<double> seq_a, seq_b;
  for (int i = 0; i < 100; ++i) {
    seq_a.push_back(a.normal());
    seq_b.push_back(b.normal());
  }
  CHECK(seq_a == seq_b);
  CHECK(c.normal() != seq_a[0]);

  // constructing streams in any order gives the same per-index draws
  std::vector<double> forward, backward;
  for (int i = 0; i < 10; ++i) {
    RandomStream s(99, static_cast<std::uint64_t>(i));
    forward.push_back(s.uniform01());
  }
  for (int i = 9; i >= 0; --i) {
    RandomStream s(99, static_cast<std::uint64_t>(i));
    backward.push_back(s.uniform01());
  }
  std::reverse(backward.begin(), backward.end());
  CHECK(forward == backward);
}

TEST_CASE("haar unitaries") {
  SECTION("N=1 is a unit-modulus scalar") {
    RandomStream stream(1, 0);
    const MatrixXcd u = haar_unitary(1, stream);
    CHECK(std::abs(std::abs(u(0, 0)) - 1.0) <= 1e-14);
  }
  SECTION("unitarity at N=16") {
    RandomStream stream(2, 0);
    const MatrixXcd u = haar_unitary(16, stream);
    CHECK((u.adjoint() * u - MatrixXcd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-12);
    for (Index j = 0; j < 16; ++j) CHECK(std::abs(u.col(j).norm() - 1.0) <= 1e-12);
  }
  SECTION("first-entry second moment matches the Haar value 1/N") {
    // E|U_11|^2 = 1/N; checked within 5 empirical standard errors at N=4.
    const int n_draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_draws; ++i) {
      RandomStream stream(77, static_cast<std::uint64_t>(i));
      const MatrixXcd u = haar_unitary(4, stream);
      const double x = std::norm(u(0, 0));
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n_draws;
    const double var = sum_sq / n_draws - mean * mean;
    const double se = std::sqrt(var / n_draws);
    CHECK(std::abs(mean - 0.25) <= 5.0 * se);
  }
}

TEST_CASE("isospectral samples") {
  const StateClass cls = slater_class(4, 2);
  SECTION("pure spectrum gives a rank-one projector") {
    RandomStream stream(5, 0);
    const DensityMatrix rho = isospectral_sample(cls, pure_spectrum(6), stream);
    CHECK(purity(rho.rho) == Catch::Approx(1.0).margin(1e-12));
    CHECK(idempotence_error(rho.rho) <= 1e-12);
  }
  SECTION("uniform spectrum gives the maximally mixed state") {
    RandomStream stream(5, 1);
    const Spectrum uniform = make_spectrum(VectorXd::Constant(6, 1.0 / 6.0));
    const DensityMatrix rho = isospectral_sample(cls, uniform, stream);
    CHECK((rho.rho - MatrixXcd::Identity(6, 6) / 6.0).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SECTION("sample purity equals the spectrum purity") {
    const Spectrum spec = depolarized_spectrum(6, 0.3);
    RandomStream stream(5, 2);
    const DensityMatrix rho = isospectral_sample(cls, spec, stream);
    CHECK(purity(rho.rho) == Catch::Approx(spec.purity()).margin(1e-10));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho.rho, Eigen::EigenvaluesOnly);
    CHECK((es.eigenvalues() - spec.p).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SECTION("spectrum length must match the class dimension") {
    RandomStream stream(5, 3);
    CHECK_THROWS_AS(isospectral_sample(cls, pure_spectrum(5), stream), validation_error);
  }
}

TEST_CASE("random class members") {
  SECTION("separable members have Schmidt rank one across the 1|2 cut") {
    RandomStream stream(9, 0);
    const VectorXcd psi = random_class_member(separable_class(3, 2), stream);
    MatrixXcd reshaped(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) reshaped(i, j) = psi[3 * i + j];
    Eigen::JacobiSVD<MatrixXcd> svd(reshaped);
    CHECK(svd.singularValues()[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(svd.singularValues().tail(2).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SECTION("members are normalized and certified by the membership functional") {
    for (const auto& cls : {separable_class(2, 3), bosonic_class(3, 2),
                            slater_class(5, 2), gaussian_class(4)}) {
      const ProjectorA a = build_a(cls);
      for (int i = 0; i < 25; ++i) {
        RandomStream stream(13, static_cast<std::uint64_t>(i));
        const VectorXcd psi = random_class_member(cls, stream);
        INFO(to_string(cls));
        CHECK(std::abs(psi.norm() - 1.0) <= 1e-10);
        CHECK(pure_membership(a, psi) <= 1e-9);
      }
    }
  }
  SECTION("gaussian members have orthogonal correlation matrices") {
    for (int i = 0; i < 10; ++i) {
      RandomStream stream(15, static_cast<std::uint64_t>(i));
      const VectorXcd g = random_class_member(gaussian_class(3), stream);
      const MatrixXd m = correlation_matrix(g * g.adjoint(), 3);
      CHECK((m * m.transpose() - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("random mixtures") {
  const StateClass cls = separable_class(2, 2);
  const ProjectorA a = build_a(cls);
  SECTION("k=1 is a pure member with f = 0") {
    RandomStream stream(19, 0);
    const DensityMatrix rho = random_mixture(cls, 1, stream);
    CHECK(purity(rho.rho) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(witness_value(a, rho).f) <= 1e-11);
  }
  SECTION("mixtures stay undetected (f <= 0)") {
    double worst = -1.0;
    for (int i = 0; i < 200; ++i) {
      RandomStream stream(19, 100 + static_cast<std::uint64_t>(i));
      const DensityMatrix rho = random_mixture(cls, 16, stream);
      worst = std::max(worst, witness_value(a, rho).f);
    }
    CHECK(worst <= 1e-10);
  }
  SECTION("mixtures are valid density matrices") {
    RandomStream stream(19, 999);
    const DensityMatrix rho = random_mixture(cls, 5, stream);
    CHECK_NOTHROW(make_density_matrix(cls, rho.rho));
  }
  SECTION("identical seeds reproduce identical mixtures bit for bit") {
    RandomStream s1(21, 4), s2(21, 4);
    const DensityMatrix r1 = random_mixture(cls, 6, s1);
    const DensityMatrix r2 = random_mixture(cls, 6, s2);
    CHECK((r1.rho - r2.rho).cwiseAbs().maxCoeff() == 0.0);
  }
}
