#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "spdemono/errors.hpp"
#include "spdemono/noise.hpp"
#include "spdemono/spectral.hpp"

using namespace spdemono;

namespace {

double sample_variance(const OuPathSet& p, int m, int k) {
  double mean = 0.0;
  for (int s = 0; s < p.n_samples(); ++s) mean += p.value(s, m, k);
  mean /= p.n_samples();
  double ss = 0.0;
  for (int s = 0; s < p.n_samples(); ++s) ss += std::pow(p.value(s, m, k) - mean, 2);
  return ss / (p.n_samples() - 1);
}

// Standard normal CDF.
double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(1.0, 8);
  CHECK(g.tau() == 0.125);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(8) == 1.0);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), DomainError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), DomainError);
}

TEST_CASE("marginal variance") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(ou_marginal_variance(1, 50.0) == doctest::Approx(1.0 / (2.0 * pi2)).epsilon(1e-14));
  CHECK(ou_marginal_variance(1, 0.0) == 0.0);
  CHECK(ou_marginal_variance(7, 0.0) == 0.0);
  const double t = std::ldexp(1.0, -13);
  const double v = ou_marginal_variance(1, t);
  CHECK(v == doctest::Approx(1.2192336198684664e-4).epsilon(1e-12));
  // small-t expansion t - lambda t^2 + (2/3) lambda^2 t^3
  CHECK(std::abs(v - (t - pi2 * t * t)) < 2.0 / 3.0 * pi2 * pi2 * t * t * t * 1.01);
  CHECK_THROWS_AS(ou_marginal_variance(1, -1.0), DomainError);
}

TEST_CASE("simulate: shape, start at zero, reproducibility") {
  const TimeGrid g(1.0, 16);
  const auto a = simulate(5, g, 3, 99);
  const auto b = simulate(5, g, 3, 99);
  CHECK(a == b);
  CHECK(a.raw().size() == 3u * 17u * 5u);
  for (int s = 0; s < 3; ++s) {
    for (int k = 1; k <= 5; ++k) CHECK(a.value(s, 0, k) == 0.0);
  }
  const auto c = simulate(5, g, 3, 100);
  CHECK_FALSE(a == c);
  // Sample streams are independent of how the set is batched.
  const auto tail = simulate(5, g, 2, 99, 1);
  for (int m = 0; m <= 16; ++m) {
    for (int k = 1; k <= 5; ++k) CHECK(tail.value(0, m, k) == a.value(1, m, k));
  }
}

TEST_CASE("simulate: resource limit is reported") {
  CHECK_THROWS_AS(simulate(4096, TimeGrid(1.0, 1 << 20), 1000, 1), ResourceError);
}

TEST_CASE("simulate: marginal moments and autocovariance") {
  const TimeGrid g(1.0, 4);
  const int n = 10000;
  const auto p = simulate(4, g, n, 2024);
  double mean = 0.0;
  for (int s = 0; s < n; ++s) mean += p.value(s, 4, 1);
  mean /= n;
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(ou_marginal_variance(1, 1.0) / n));
  for (int k = 1; k <= 4; ++k) {
    CHECK(sample_variance(p, 4, k) == doctest::Approx(ou_marginal_variance(k, 1.0)).epsilon(0.05));
  }

  // Lag-1 autocovariance on a fine grid: Cov(w_m, w_{m+1}) = e^{-lambda tau} Var(w_m).
  const TimeGrid fine(0.05, 10);
  const auto q = simulate(2, fine, n, 7);
  for (int k = 1; k <= 2; ++k) {
    const int m = 5;
    double cov = 0.0;
    for (int s = 0; s < n; ++s) cov += q.value(s, m, k) * q.value(s, m + 1, k);
    cov /= n;
    const double var = ou_marginal_variance(k, fine.node(m));
    const double expect = std::exp(-eigenvalue(k) * fine.tau()) * var;
    // se of a product moment of two correlated normals <= sqrt(2) var / sqrt(n)
    CHECK(std::abs(cov - expect) <= 4.0 * std::sqrt(2.0) * var / std::sqrt(double(n)));
  }
}

TEST_CASE("simulate: chi-square goodness of fit of the marginal law") {
  const int n = 10000;
  const int bins = 10;
  const double critical_99 = 21.666;  // chi^2_{9}, 99%
  const TimeGrid g(0.5, 5);
  const auto p = simulate(3, g, n, 31337);
  for (int m : {1, 3, 5}) {
    for (int k : {1, 3}) {
      const double sd = std::sqrt(ou_marginal_variance(k, g.node(m)));
      std::vector<int> count(bins, 0);
      for (int s = 0; s < n; ++s) {
        const double u = phi(p.value(s, m, k) / sd);
        count[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(u * bins)))]++;
      }
      double chi2 = 0.0;
      const double e = double(n) / bins;
      for (int c : count) chi2 += (c - e) * (c - e) / e;
      CHECK(chi2 < critical_99);
    }
  }
}

TEST_CASE("restrict") {
  const TimeGrid fine(1.0, 8);
  const auto p = simulate(6, fine, 2, 5);
  CHECK(restrict(p, fine, 6) == p);

  const TimeGrid coarse(1.0, 4);
  const auto r = restrict(p, coarse, 3);
  CHECK(r.n_modes() == 3);
  CHECK(r.grid() == coarse);
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m <= 4; ++m) {
      for (int k = 1; k <= 3; ++k) CHECK(r.value(s, m, k) == p.value(s, 2 * m, k));
    }
  }

  // Nesting.
  const auto direct = restrict(p, TimeGrid(1.0, 2), 2);
  const auto twice = restrict(restrict(p, coarse, 4), TimeGrid(1.0, 2), 2);
  CHECK(direct == twice);

  CHECK_THROWS_AS(restrict(p, TimeGrid(1.0, 3), 3), IncompatibleGridError);
  CHECK_THROWS_AS(restrict(p, TimeGrid(2.0, 4), 3), IncompatibleGridError);
  CHECK_THROWS_AS(restrict(p, coarse, 7), IncompatibleGridError);
}

TEST_CASE("truncation error closed form") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double v = truncation_error_analytic(16, 1.0, 1000000);
  const double expect = oracle::partial_sum(17, 1000000, [&](int k) {
    const double lam = pi2 * k * k;
    return (1.0 - std::exp(-2.0 * lam)) / (2.0 * lam);
  });
  CHECK(v == doctest::Approx(expect).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.0030693496386264537).epsilon(1e-10));
  CHECK(v <= 1.0 / (2.0 * pi2 * 16));
  CHECK(v >= 1.0 / (2.0 * (1.0 + 2.0 * pi2)) / 16);
  for (int N : {1, 4, 8, 32, 100}) {
    for (double t : {0.01, 0.1, 1.0, 3.0}) {
      const double s = truncation_error_analytic(N, t, 200000);
      CHECK(s <= 1.0 / (2.0 * pi2 * N));
      CHECK(s + truncation_tail_bound(200000) >= t / (2.0 * (1.0 + 2.0 * pi2 * t)) / N);
    }
  }
  CHECK_THROWS_AS(truncation_error_analytic(8, 1.0, 8), DomainError);
}

TEST_CASE("Monte Carlo truncation error matches the partial sum") {
  const int n = 4000;
  const auto p = simulate(64, TimeGrid(1.0, 1), n, 77);
  std::vector<double> tail(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    for (int k = 9; k <= 64; ++k) tail[static_cast<std::size_t>(s)] += std::pow(p.value(s, 1, k), 2);
  }
  double mean = 0.0;
  for (double x : tail) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : tail) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  CHECK(std::abs(mean - truncation_error_analytic(8, 1.0, 64)) <= 3.0 * se);
}

TEST_CASE("csv dump") {
  const auto p = simulate(2, TimeGrid(1.0, 2), 1, 3);
  std::ostringstream os;
  write_csv(p, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "2,2,1,1,3");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}
