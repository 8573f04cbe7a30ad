#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spdemono/errors.hpp"
#include "spdemono/spectral.hpp"

using namespace spdemono;

namespace {

SpectralField random_field(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  std::vector<double> c(static_cast<std::size_t>(n));
  for (double& x : c) x = d(rng);
  return SpectralField(std::move(c));
}

SpectralField inverse_square(int n) {
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) c[static_cast<std::size_t>(k - 1)] = 1.0 / (double(k) * k);
  return SpectralField(std::move(c));
}

}  // namespace

TEST_CASE("eigenvalues") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(eigenvalue(1) == doctest::Approx(9.8696044).epsilon(1e-9));
  CHECK(eigenvalue(2) == doctest::Approx(39.4784176).epsilon(1e-9));
  CHECK(eigenvalue(10) == doctest::Approx(100 * pi2));
  CHECK_THROWS_AS(eigenvalue(0), DomainError);
  CHECK_THROWS_AS(eigenvalue(-3), DomainError);
}

TEST_CASE("fields reject invalid data") {
  CHECK_THROWS_AS(SpectralField(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(SpectralField({1.0, NAN}), DomainError);
  CHECK_THROWS_AS(GridField({INFINITY}), DomainError);
}

TEST_CASE("dealias_points") {
  CHECK(dealias_points(1, 1) == 1);
  CHECK(dealias_points(16, 3) == 63);
  CHECK(dealias_points(128, 5) == 1023);
  CHECK(dealias_points(256, 5) == 2047);
  CHECK(dealias_points(4, 2) == 15);
}

TEST_CASE("synthesize") {
  const auto g = synthesize(SpectralField({1.0}), 3);
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK(g[2] == doctest::Approx(std::numbers::sqrt2));
  CHECK(g[3] == doctest::Approx(1.0));

  const auto flat = synthesize(SpectralField::zeros(5), 9);
  for (double v : flat.values()) CHECK(v == 0.0);

  const auto g2 = synthesize(SpectralField({0.0, 1.0}), 7);
  for (int j = 1; j <= 7; ++j) {
    CHECK(g2[j] == doctest::Approx(oracle::basis(2, j / 8.0)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(synthesize(SpectralField({1.0, 2.0, 3.0}), 2), ResolutionError);
}

TEST_CASE("synthesize matches the direct sum") {
  std::mt19937_64 rng(11);
  for (int J : {7, 31, 100}) {
    const auto f = random_field(rng, 7);
    const auto fast = synthesize(f, J);
    const auto slow = oracle::synthesize({f.coeffs().begin(), f.coeffs().end()}, J);
    for (int j = 1; j <= J; ++j) CHECK(std::abs(fast[j] - slow[static_cast<std::size_t>(j - 1)]) < 1e-12);
  }
}

TEST_CASE("analyze") {
  const auto back = analyze(synthesize(SpectralField({0.3, -1.2, 0.05}), 16), 3);
  CHECK(back[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(back[2] == doctest::Approx(-1.2).epsilon(1e-12));
  CHECK(back[3] == doctest::Approx(0.05).epsilon(1e-12));

  const auto none = analyze(GridField(std::vector<double>(9, 0.0)), 4);
  for (double c : none.coeffs()) CHECK(c == 0.0);

  std::vector<double> v(7);
  for (int j = 1; j <= 7; ++j) v[static_cast<std::size_t>(j - 1)] = oracle::basis(3, j / 8.0);
  const auto c = analyze(GridField(v), 3);
  CHECK(std::abs(c[1]) < 1e-14);
  CHECK(std::abs(c[2]) < 1e-14);
  CHECK(c[3] == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(analyze(GridField(v), 8), ResolutionError);
}

TEST_CASE("roundtrip and linearity on random fields") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> nd(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const int N = nd(rng);
    const int J = N + nd(rng) - 1;
    const auto f = random_field(rng, N);
    const auto back = analyze(synthesize(f, J), N);
    for (int k = 1; k <= N; ++k) CHECK(std::abs(back[k] - f[k]) < 1e-12);

    const auto g = random_field(rng, N);
    const double a = std::normal_distribution<double>()(rng);
    const auto lhs = synthesize(f + a * g, J);
    const auto sf = synthesize(f, J), sg = synthesize(g, J);
    for (int j = 1; j <= J; ++j) CHECK(std::abs(lhs[j] - (sf[j] + a * sg[j])) < 1e-11);
  }
}

TEST_CASE("project") {
  const SpectralField f({1.0, 2.0, 3.0});
  CHECK(project(f, 3).coeffs()[2] == 3.0);
  const auto padded = project(f, 5);
  CHECK(padded.n_modes() == 5);
  CHECK(padded[5] == 0.0);
  CHECK(project(f, 1).n_modes() == 1);
  CHECK(project(f, 1)[1] == 1.0);

  // ||(I - P_16) u0||^2 for c_k = k^{-2}, k <= 512.
  const auto u0 = inverse_square(512);
  const double tail_sq = std::pow(l2_norm(u0), 2) - std::pow(l2_norm(project(u0, 16)), 2);
  const double expect = oracle::partial_sum(17, 512, [](int k) { return std::pow(k, -4.0); });
  CHECK(expect == doctest::Approx(7.4065611304488e-05).epsilon(1e-12));
  CHECK(tail_sq == doctest::Approx(expect).epsilon(1e-9));
  CHECK(l2_norm(u0 - project(u0, 16)) == doctest::Approx(std::sqrt(expect)).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_field(rng, 12);
    for (int n = 1; n < 20; ++n) CHECK(l2_norm(project(g, n)) <= l2_norm(g));
  }
}

TEST_CASE("l2 and sobolev norms") {
  CHECK(l2_norm(SpectralField({3.0, 4.0})) == 5.0);
  CHECK(l2_norm(SpectralField::zeros(4)) == 0.0);
  const double expect = std::sqrt(oracle::partial_sum(1, 512, [](int k) { return std::pow(k, -4.0); }));
  CHECK(expect == doctest::Approx(1.0403476492187012).epsilon(1e-12));
  CHECK(l2_norm(inverse_square(512)) == doctest::Approx(expect).epsilon(1e-13));

  std::mt19937_64 rng(8);
  const auto f = random_field(rng, 9);
  CHECK(sobolev_norm(f, 0.0) == l2_norm(f));
  CHECK(sobolev_norm(SpectralField({1.0}), 2.0) == doctest::Approx(eigenvalue(1)));
  CHECK(sobolev_norm(SpectralField({1.0, 1.0}), 1.0) ==
        doctest::Approx(std::numbers::pi * std::sqrt(5.0)));
  CHECK_THROWS_AS(sobolev_norm(f, -0.5), DomainError);
}

TEST_CASE("lq norm") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_field(rng, 1 + trial);
    CHECK(std::abs(lq_norm(f, 2.0, 2 * f.n_modes()) - l2_norm(f)) <= 1e-10);
    CHECK(std::abs(lq_norm(f, 2.0) - l2_norm(f)) <= 1e-10);
  }
  // ||e_1||_4^4 = int 4 sin^4(pi x) dx = 3/2.
  const double quad = oracle::simpson([](double x) { return std::pow(oracle::basis(1, x), 4); });
  CHECK(quad == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(lq_norm(SpectralField({1.0}), 4.0) == doctest::Approx(std::pow(quad, 0.25)).epsilon(1e-12));
  CHECK(lq_norm(SpectralField::zeros(3), 6.0) == 0.0);
  CHECK_THROWS_AS(lq_norm(SpectralField({1.0}), 1.5, 31), DomainError);
  CHECK_THROWS_AS(lq_norm(SpectralField({1.0, 1.0, 1.0}), 6.0, 10), ResolutionError);
}
