#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spdemono/errors.hpp"
#include "spdemono/scheme.hpp"

using namespace spdemono;

namespace {

SchemeConfig config(int N, double T, int M, const char* drift) {
  return SchemeConfig(N, TimeGrid(T, M), builtin(drift));
}

DriftSpec negative_cube() {
  // (y^3 - x^3)(x - y) <= -(1/4)|x - y|^4
  return DriftSpec::polynomial({0.0, 0.0, 0.0, -1.0}, {0.0, 0.25, 4.0, 3.0}, "negative_cube");
}

SpectralField random_field(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) c[static_cast<std::size_t>(k)] = d(rng) / (k + 1);
  return SpectralField(std::move(c));
}

OuPathSet zero_noise(int N, const TimeGrid& g) {
  return OuPathSet(N, g, 1, 0, 0,
                   std::vector<double>(static_cast<std::size_t>(N) * static_cast<std::size_t>(g.steps() + 1), 0.0));
}

}  // namespace

TEST_CASE("step-size admissibility") {
  CHECK_NOTHROW(config(4, 1.0, 8, "allen_cahn").validate());
  CHECK_THROWS_AS(config(4, 1.0, 4, "allen_cahn").validate(), ConfigError);  // tau = 1/4 = 1/(4b)
  CHECK_THROWS_AS(config(4, 1.0, 1, "zero").validate(), ConfigError);
  CHECK_NOTHROW(config(4, 1.0, 2, "zero").validate());
  auto c = config(4, 1.0, 8, "allen_cahn");
  c.newton_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.newton_tol = 1e-12;
  c.newton_max_iter = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(ImplicitStepper{c}, ConfigError);
}

TEST_CASE("linear step closed form") {
  const auto cfg = config(6, 0.01, 1, "zero");
  const SpectralField zm({1.0, -2.0, 0.5, 0.0, 3.0, 1.0});
  const auto z = implicit_step(zm, SpectralField::zeros(6), cfg);
  CHECK(std::abs(z[1] - 1.0 / (1.0 + 0.01 * std::numbers::pi * std::numbers::pi)) <= 1e-12);
  CHECK(std::abs(z[1] - 0.9101698376462755) <= 1e-12);
  for (int k = 1; k <= 6; ++k) CHECK(std::abs(z[k] - zm[k] / (1.0 + 0.01 * eigenvalue(k))) <= 1e-12);
}

TEST_CASE("single-mode cubic step matches bisection") {
  SchemeConfig cfg(1, TimeGrid(0.1, 1), negative_cube());
  // P_1 F(c e_1) = -c^3 int e_1^4 e_1... coefficient = -c^3 * int e_1^4.
  const double q4 = oracle::simpson([](double x) { return std::pow(oracle::basis(1, x), 4); });
  CHECK(q4 == doctest::Approx(1.5).epsilon(1e-12));
  const double lam = std::numbers::pi * std::numbers::pi;
  const double root = oracle::bisect([&](double c) { return (1.0 + 0.1 * lam) * c + 0.1 * q4 * c * c * c - 1.0; }, 0.0, 1.0);
  CHECK(root == doctest::Approx(0.4941709616948304).epsilon(1e-12));
  for (auto solver : {NonlinearSolver::kNewton, NonlinearSolver::kNewtonDense, NonlinearSolver::kPicard}) {
    cfg.solver = solver;
    const auto z = implicit_step(SpectralField({1.0}), SpectralField({0.0}), cfg);
    CHECK(std::abs(z[1] - root) <= 1e-10);
  }
}

TEST_CASE("zero is a fixed point") {
  const auto z = implicit_step(SpectralField::zeros(8), SpectralField::zeros(8), config(8, 0.1, 1, "allen_cahn"));
  for (double c : z.coeffs()) CHECK(c == 0.0);
}

TEST_CASE("solvers agree and satisfy the discrete variational identity") {
  std::mt19937_64 rng(17);
  for (const char* drift : {"allen_cahn", "paper_quintic"}) {
    auto cfg = config(24, 0.05, 1, drift);
    for (int trial = 0; trial < 5; ++trial) {
      // Picard is only a contraction for moderate data.
      const double scale = trial < 2 ? 0.3 : 1.0;
      const auto zm = random_field(rng, 24, scale);
      const auto w = random_field(rng, 24, 0.3 * scale);
      StepStats stats;
      cfg.solver = NonlinearSolver::kNewton;
      const auto a = implicit_step(zm, w, cfg, &stats);
      CHECK(stats.residual <= cfg.newton_tol);
      CHECK(stats.iterations <= 8);
      cfg.solver = NonlinearSolver::kNewtonDense;
      const auto b = implicit_step(zm, w, cfg);
      for (int k = 1; k <= 24; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-11);
      if (trial < 2) {
        cfg.solver = NonlinearSolver::kPicard;
        cfg.newton_max_iter = 500;
        const auto c = implicit_step(zm, w, cfg);
        cfg.newton_max_iter = 50;
        for (int k = 1; k <= 24; ++k) CHECK(std::abs(a[k] - c[k]) <= 1e-11);
      }
      const auto r = step_residual(a, zm, w, cfg);
      CHECK(l2_norm(r) <= cfg.newton_tol);
    }
  }
}

TEST_CASE("nonconvergence is reported") {
  auto cfg = config(8, 0.2, 1, "allen_cahn");
  cfg.newton_max_iter = 1;
  cfg.newton_tol = 1e-14;
  std::vector<double> big(8, 0.0);
  big[0] = 8.0;
  try {
    implicit_step(SpectralField(big), SpectralField::zeros(8), cfg);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.code() == ErrorCode::kNonConvergence);
    CHECK(e.last_residual > cfg.newton_tol);
  }
}

TEST_CASE("Jacobian") {
  const auto lin = newton_jacobian(SpectralField::zeros(5), SpectralField::zeros(5), config(5, 0.01, 1, "zero"));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double expect = i == j ? 1.0 + 0.01 * eigenvalue(i + 1) : 0.0;
      CHECK(std::abs(lin(i, j) - expect) <= 1e-13);
    }
  }

  std::mt19937_64 rng(2);
  for (const char* drift : {"allen_cahn", "paper_quintic"}) {
    const auto cfg = config(12, 0.05, 1, drift);
    for (int trial = 0; trial < 5; ++trial) {
      const auto z = random_field(rng, 12, 0.5);
      const auto w = random_field(rng, 12, 0.3);
      const auto v0 = random_field(rng, 12, 1.0);
      const auto v = (1.0 / l2_norm(v0)) * v0;
      const auto zm = SpectralField::zeros(12);
      const auto jac = newton_jacobian(z, w, cfg);
      const double eps = 1e-6;
      const auto r0 = step_residual(z, zm, w, cfg);
      const auto r1 = step_residual(z + eps * v, zm, w, cfg);
      const Eigen::Map<const Eigen::VectorXd> vv(v.coeffs().data(), 12);
      const Eigen::VectorXd jv = jac * vv;
      double err = 0.0;
      for (int k = 1; k <= 12; ++k) err += std::pow((r1[k] - r0[k]) / eps - jv(k - 1), 2);
      CHECK(std::sqrt(err) <= 1e-5);
      // Central differences remove the O(eps) term.
      const double h = 1e-4;
      const auto rp = step_residual(z + h * v, zm, w, cfg);
      const auto rm = step_residual(z - h * v, zm, w, cfg);
      double cerr = 0.0;
      for (int k = 1; k <= 12; ++k) cerr += std::pow((rp[k] - rm[k]) / (2 * h) - jv(k - 1), 2);
      CHECK(std::sqrt(cerr) <= 1e-7);
      CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("run_path: linear heat flow without noise") {
  const TimeGrid g(0.5, 10);
  SchemeConfig cfg(6, g, builtin("zero"));
  const SpectralField u0({1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125});
  const auto tr = run_path(cfg, u0, zero_noise(6, g), 0);
  REQUIRE(tr.u.size() == 11u);
  for (int m = 0; m <= 10; ++m) {
    for (int k = 1; k <= 6; ++k) {
      const double expect = std::pow(1.0 + g.tau() * eigenvalue(k), -m) * u0[k];
      CHECK(std::abs(tr.u[static_cast<std::size_t>(m)][k] - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
    }
  }
  const auto zero = run_path(config(4, 1.0, 8, "allen_cahn"), SpectralField::zeros(4), zero_noise(4, TimeGrid(1.0, 8)), 0);
  for (const auto& f : zero.u) CHECK(l2_norm(f) == 0.0);
}

TEST_CASE("run_path: z_0 = P_N u0 and u = z + W") {
  const TimeGrid g(1.0, 16);
  const auto ou = simulate(10, g, 2, 5);
  const auto cfg = config(8, 1.0, 16, "paper_quintic");
  std::vector<double> c(20, 0.1);
  const auto tr = run_path(cfg, SpectralField(c), ou, 1);
  CHECK(tr.z[0].n_modes() == 8);
  for (int m = 0; m <= 16; ++m) {
    for (int k = 1; k <= 8; ++k) {
      CHECK(tr.u[static_cast<std::size_t>(m)][k] == tr.z[static_cast<std::size_t>(m)][k] + ou.value(1, m, k));
    }
  }
  CHECK_THROWS_AS(run_path(config(8, 1.0, 8, "paper_quintic"), SpectralField(c), ou, 0), IncompatibleGridError);
  CHECK_THROWS_AS(run_path(config(12, 1.0, 16, "paper_quintic"), SpectralField(c), ou, 0), IncompatibleGridError);
}

TEST_CASE("run_path matches an independent Picard reimplementation") {
  const int N = 16, M = 64;
  const TimeGrid g(1.0, M);
  const auto ou = simulate(N, g, 1, 123);
  const auto ac = builtin("allen_cahn");
  std::vector<double> u0(N);
  for (int k = 1; k <= N; ++k) u0[static_cast<std::size_t>(k - 1)] = 1.0 / (k * k);
  const auto tr = run_path(SchemeConfig(N, g, ac), SpectralField(u0), ou, 0);

  std::vector<double> z = u0;
  for (int m = 0; m < M; ++m) {
    std::vector<double> w(ou.at(0, m + 1).begin(), ou.at(0, m + 1).end());
    z = oracle::picard_step(z, w, g.tau(), [&](double x) { return ac.f(x); }, 100);
    for (int k = 1; k <= N; ++k) {
      CHECK(std::abs(tr.z[static_cast<std::size_t>(m + 1)][k] - z[static_cast<std::size_t>(k - 1)]) <= 1e-8);
    }
  }
}

TEST_CASE("linear contractivity along a noisy path") {
  const TimeGrid g(1.0, 64);
  const auto ou = simulate(16, g, 1, 9);
  std::mt19937_64 rng(1);
  const auto tr = run_path(SchemeConfig(16, g, builtin("zero")), random_field(rng, 16, 1.0), ou, 0);
  for (int m = 0; m < 64; ++m) {
    CHECK(l2_norm(tr.z[static_cast<std::size_t>(m + 1)]) <= l2_norm(tr.z[static_cast<std::size_t>(m)]));
  }
}

TEST_CASE("coupled trajectories obey the monotone-step energy bound") {
  const TimeGrid g(1.0, 32);
  const double tau = g.tau();
  const auto ou = simulate(16, g, 1, 44);
  const auto cfg = SchemeConfig(16, g, builtin("allen_cahn"));
  std::mt19937_64 rng(6);
  const auto a = run_path(cfg, random_field(rng, 16, 1.5), ou, 0);
  const auto b = run_path(cfg, random_field(rng, 16, 1.5), ou, 0);
  const double factor = 1.0 / std::sqrt(1.0 - 2.0 * cfg.drift.b() * tau);
  for (int m = 0; m < 32; ++m) {
    const auto i = static_cast<std::size_t>(m);
    CHECK(l2_norm(a.z[i + 1] - b.z[i + 1]) <= factor * l2_norm(a.z[i] - b.z[i]) + 1e-8);
  }
}

TEST_CASE("run_path annotates solver failures") {
  const TimeGrid g(1.0, 8);
  auto cfg = SchemeConfig(8, g, builtin("allen_cahn"));
  cfg.newton_max_iter = 1;
  cfg.newton_tol = 1e-15;
  std::vector<double> u0(8, 0.0);
  u0[0] = 5.0;
  try {
    run_path(cfg, SpectralField(u0), simulate(8, g, 1, 1), 0);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(std::string(e.what()).find("step m=0, sample 0") != std::string::npos);
  }
}
