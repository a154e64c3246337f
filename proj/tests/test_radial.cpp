#include <doctest.h>

#include "oracles.hpp"
#include "robin/radial.hpp"

using namespace robin;

TEST_CASE("pi_p and sphere measures") {
  CHECK(radial::pi_p(2) == doctest::Approx(oracle::pi).epsilon(1e-15));
  CHECK(radial::sphere_measure(2) == doctest::Approx(2 * oracle::pi).epsilon(1e-15));
  CHECK(radial::sphere_measure(3) == doctest::Approx(4 * oracle::pi).epsilon(1e-15));
  CHECK(radial::sphere_measure(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(radial::pi_p(4) == doctest::Approx(2.2214).epsilon(1e-4));
  CHECK(radial::pi_p(1.5) == doctest::Approx(4.8368).epsilon(1e-4));
}

TEST_CASE("ball eigenvalues for p = 2") {
  const auto b3 = radial::ball_dirichlet_eigen(2, 3, 1);
  CHECK(std::abs(b3.lambda - oracle::pi * oracle::pi) < 1e-6);
  const auto b2 = radial::ball_dirichlet_eigen(2, 2, 1);
  CHECK(std::abs(b2.lambda - oracle::disk_dirichlet_lambda()) < 1e-8);
  // one dimension: the interval (-1, 1)
  const auto b1 = radial::ball_dirichlet_eigen(2, 1, 1);
  CHECK(std::abs(b1.lambda - oracle::pi * oracle::pi / 4) < 1e-8);
}

TEST_CASE("one-dimensional p-eigenvalue matches the pi_p formula") {
  for (double p : {1.5, 3.0, 4.0}) {
    CAPTURE(p);
    const auto b = radial::ball_dirichlet_eigen(p, 1, 1);
    // interval of length 2: (p - 1) (pi_p / 2)^p
    CHECK(oracle::rel_err(b.lambda, (p - 1) * std::pow(radial::pi_p(p) / 2, p)) < 1e-8);
  }
}

TEST_CASE("profile normalization and radius scaling") {
  const auto b = radial::ball_dirichlet_eigen(3, 2, 1);
  CHECK(b.profile.front() == 1.0);
  CHECK(std::abs(b.profile.back()) < 1e-6);
  for (std::size_t i = 1; i < b.profile.size(); ++i) CHECK(b.profile[i] < b.profile[i - 1]);
  for (std::size_t i = 0; i + 1 < b.profile.size(); ++i) CHECK(b.profile[i] > 0.0);
  const auto big = radial::ball_dirichlet_eigen(3, 2, 2);
  CHECK(oracle::rel_err(big.lambda * 8, b.lambda) < 1e-8);
  CHECK_THROWS_AS(b.norm(7.0), std::out_of_range);
  // the L^2 norm of J0(j r) on the unit disk
  const auto d = radial::ball_dirichlet_eigen(2, 2, 1);
  const double j = oracle::j01();
  const double j1 = oracle::bessel_j(1, j);
  CHECK(oracle::rel_err(d.norm(2), std::sqrt(oracle::pi) * std::abs(j1)) < 1e-8);
}

TEST_CASE("reverse Hoelder constants") {
  const double lam = 5.0;
  CHECK(radial::reverse_holder_constant(2, 1.5, 1.5, lam, 2) == 1.0);
  CHECK_THROWS_AS(radial::reverse_holder_constant(2, 3, 2, lam, 2), std::invalid_argument);
  CHECK_THROWS_AS(radial::reverse_holder_constant(2, 0, 2, lam, 2), std::invalid_argument);
  // for p = 2, N = 2 the constant scales like lambda
  const double k1 = radial::kbar(2, 5.0, 2);
  const double k2 = radial::kbar(2, 50.0, 2);
  CHECK(k1 * std::pow(5.0, -1.0) == doctest::Approx(k2 * std::pow(50.0, -1.0)).epsilon(1e-8));
  // unit disk: j^2 / (4 pi) from the Bessel integrals of J0
  const double lam_d = oracle::disk_dirichlet_lambda();
  CHECK(radial::kbar(2, lam_d, 2) == doctest::Approx(lam_d / (4 * oracle::pi)).epsilon(1e-8));
  CHECK(radial::kbar(2, lam_d, 2) == doctest::Approx(0.4602).epsilon(1e-3));
  CHECK(radial::kbar(2, lam_d / 4, 2) == doctest::Approx(0.1150).epsilon(1e-3));
  CHECK(radial::kbar(3, 7.0, 2) == doctest::Approx(std::pow(radial::reverse_holder_constant(3, 2, 3, 7.0, 2), 3)).epsilon(1e-12));
}

TEST_CASE("Hersch lower bound") {
  CHECK(radial::hersch_lower_bound(2, 1, 1) == doctest::Approx(oracle::pi * oracle::pi / 4 / std::pow(1 + oracle::pi / 2, 2)));
  CHECK(radial::hersch_lower_bound(2, 1, 1) == doctest::Approx(0.3733).epsilon(1e-3));
  CHECK(radial::hersch_lower_bound(2, 1e12, 1) == doctest::Approx(oracle::pi * oracle::pi / 4).epsilon(1e-5));
}
