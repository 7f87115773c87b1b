#include <doctest.h>

#include <cmath>
#include <random>

#include "mcast/hermitian.hpp"
#include "support.hpp"

using namespace mcast;
using doctest::Approx;

TEST_CASE("inner product of identities is the dimension") {
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    CHECK(inner(HermitianMatrix::identity(n), HermitianMatrix::identity(n)) == Approx(static_cast<double>(n)));
    CHECK(fro_norm(HermitianMatrix::identity(n)) == Approx(std::sqrt(static_cast<double>(n))));
  }
}

TEST_CASE("frobenius norm of diag(3, 4) is 5") { CHECK(fro_norm(HermitianMatrix::diagonal({3.0, 4.0})) == 5.0); }

TEST_CASE("rank-one identities") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const ComplexVec h = test::random_vec(4, rng);
    const ComplexVec g = test::random_vec(4, rng);
    CHECK(inner(outer(h), outer(g)) == Approx(std::norm(dot(g, h))).epsilon(1e-12));
    CHECK(fro_norm(outer(h)) == Approx(h.squared_norm()).epsilon(1e-12));
  }
}

TEST_CASE("outer of basis and of (1, i)/sqrt2") {
  const HermitianMatrix e = outer(ComplexVec::basis(3, 0));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(e(i, j) == Complex(i == 0 && j == 0 ? 1.0 : 0.0, 0.0));
  }
  const double r = 1.0 / std::sqrt(2.0);
  const HermitianMatrix x = outer(ComplexVec{Complex(r, 0.0), Complex(0.0, r)});
  CHECK(x(0, 0).real() == Approx(0.5));
  CHECK(x(0, 1).imag() == Approx(-0.5));
  CHECK(x(1, 0).imag() == Approx(0.5));
  CHECK(x(1, 1).real() == Approx(0.5));
  CHECK(std::abs(x(0, 1).real()) < 1e-15);
}

TEST_CASE("outer rejects the zero vector") { CHECK_THROWS_AS(outer(ComplexVec(3)), std::invalid_argument); }

TEST_CASE("mutations keep exact Hermitian symmetry") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    HermitianMatrix x = test::random_hermitian(5, rng);
    x.add_outer(test::random_vec(5, rng), 0.37);
    x.add_scaled(test::random_hermitian(5, rng), -1.3);
    x.add_identity(0.25);
    x.scale(2.5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(x(i, i).imag() == 0.0);
      for (std::size_t j = 0; j < 5; ++j) CHECK(x(i, j) == std::conj(x(j, i)));
    }
  }
}

TEST_CASE("inner product axioms on random Hermitian matrices") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rep % 6;
    const HermitianMatrix x = test::random_hermitian(n, rng);
    const HermitianMatrix y = test::random_hermitian(n, rng);
    const HermitianMatrix z = test::random_hermitian(n, rng);
    const double a = 0.3 + rep * 0.01;
    CHECK(inner(x, y) == Approx(inner(y, x)).epsilon(1e-12));
    CHECK(inner(a * x + z, y) == Approx(a * inner(x, y) + inner(z, y)).epsilon(1e-10));
    CHECK(inner(x, x) >= 0.0);
    CHECK(std::abs(inner(x, y)) <= fro_norm(x) * fro_norm(y) * (1.0 + 1e-12));
  }
  CHECK(inner(HermitianMatrix::zero(3), HermitianMatrix::zero(3)) == 0.0);
}

TEST_CASE("inner equals the real trace of the product") {
  std::mt19937_64 rng(5);
  const HermitianMatrix x = test::random_hermitian(4, rng);
  const HermitianMatrix y = test::random_hermitian(4, rng);
  Complex tr = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 4; ++k) tr += x(i, k) * y(k, i);
  }
  CHECK(inner(x, y) == Approx(tr.real()).epsilon(1e-13));
  CHECK(std::abs(tr.imag()) < 1e-12);
}

TEST_CASE("quadratic form matches inner with the outer product") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const HermitianMatrix x = test::random_hermitian(6, rng);
    const ComplexVec h = test::random_vec(6, rng);
    CHECK(x.quadratic_form(h) == Approx(inner(x, outer(h))).epsilon(1e-11));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  CHECK_THROWS_AS(inner(HermitianMatrix::zero(2), HermitianMatrix::zero(3)), std::invalid_argument);
  HermitianMatrix x = HermitianMatrix::zero(2);
  CHECK_THROWS_AS(x.add_outer(ComplexVec(3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(x.apply(ComplexVec(4)), std::invalid_argument);
}

TEST_CASE("non-finite input is rejected at construction") {
  const double nan = std::nan("");
  CHECK_THROWS_AS(ComplexVec({Complex(nan, 0.0)}), std::invalid_argument);
  CHECK_THROWS_AS(HermitianMatrix::diagonal({1.0, nan}), std::invalid_argument);
  const std::vector<Complex> a = {1.0, Complex(0.0, INFINITY), 0.0, 1.0};
  CHECK_THROWS_AS(HermitianMatrix::from_dense(2, a), std::invalid_argument);
}

TEST_CASE("system config and channel set validation") {
  CHECK_THROWS(SystemConfig{0, 3, 1.0, 1.0}.validate());
  CHECK_THROWS(SystemConfig{2, 0, 1.0, 1.0}.validate());
  CHECK_THROWS(SystemConfig{2, 3, 0.0, 1.0}.validate());
  CHECK_THROWS(SystemConfig{2, 3, 1.0, -1.0}.validate());
  const SystemConfig cfg{2, 2, 1.0, 1.0};
  CHECK_THROWS_AS(ChannelSet(cfg, {ComplexVec::basis(2, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(ChannelSet(cfg, {ComplexVec::basis(2, 0), ComplexVec(2)}), std::invalid_argument);
  CHECK_THROWS_AS(ChannelSet(cfg, {ComplexVec::basis(2, 0), ComplexVec::basis(3, 0)}), std::invalid_argument);
}

TEST_CASE("channel sampling is deterministic in the seed") {
  const SystemConfig cfg{4, 6, 1.0, 1.0};
  CHECK(sample_channels(cfg, 42) == sample_channels(cfg, 42));
  CHECK_FALSE(sample_channels(cfg, 42) == sample_channels(cfg, 43));
  CHECK(derive_seed(1, StreamDomain::kTraining, 0) != derive_seed(1, StreamDomain::kEvaluation, 0));
  CHECK(derive_seed(1, StreamDomain::kTraining, 0) != derive_seed(1, StreamDomain::kTraining, 1));
}

TEST_CASE("channel entries are CN(0, 1): mean squared norm at N = 4 is 4") {
  // Monte Carlo oracle over 1e5 samples; the standard error of the mean is
  // 2 / sqrt(1e5), about 0.0063.
  const SystemConfig cfg{4, 1, 1.0, 1.0};
  double sum = 0.0, real_sum = 0.0, real_sq = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const ChannelSet c = sample_channels(cfg, derive_seed(2024, StreamDomain::kEvaluation, s));
    sum += c[0].squared_norm();
    real_sum += c[0][0].real();
    real_sq += c[0][0].real() * c[0][0].real();
  }
  CHECK(std::abs(sum / n - 4.0) < 0.05);
  CHECK(std::abs(real_sum / n) < 0.01);
  CHECK(std::abs(real_sq / n - 0.5) < 0.01);
}

TEST_CASE("unit sphere samples have unit norm") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) CHECK(sample_unit_sphere(5, rng).norm() == Approx(1.0).epsilon(1e-14));
}
