#include "spdemono/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "spdemono/errors.hpp"
#include "spdemono/noise.hpp"

namespace spdemono {

namespace {

void validate(const DriftConstants& c) {
  if (!(c.q >= 2.0)) throw DomainError("DriftSpec: q must be >= 2");
  if (!(c.L_f > 0.0)) throw DomainError("DriftSpec: L_f must be positive");
  if (!(c.Lf_tilde > 0.0)) throw DomainError("DriftSpec: Lf_tilde must be positive");
  if (!std::isfinite(c.b)) throw DomainError("DriftSpec: b must be finite");
}

constexpr double kMarginTolerance = -1e-9;

double horner(const std::vector<double>& a, double x) {
  double acc = 0.0;
  for (auto i = a.size(); i-- > 0;) acc = acc * x + a[i];
  return acc;
}

double horner_prime(const std::vector<double>& a, double x) {
  double acc = 0.0;
  for (auto i = a.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * a[i];
  return acc;
}

}  // namespace

DriftSpec DriftSpec::polynomial(std::vector<double> coefficients, DriftConstants constants,
                                std::string name) {
  validate(constants);
  for (double a : coefficients) {
    if (!std::isfinite(a)) throw DomainError("DriftSpec: non-finite polynomial coefficient");
  }
  DriftSpec s;
  s.name_ = std::move(name);
  s.constants_ = constants;
  s.coefficients_ = std::move(coefficients);
  s.degree_ = static_cast<int>(s.coefficients_.size()) - 1;
  while (s.degree_ >= 0 && s.coefficients_[static_cast<std::size_t>(s.degree_)] == 0.0) --s.degree_;
  const auto len = static_cast<std::size_t>(s.degree_ + 1);
  s.odd_.assign(len, 0.0);
  s.even_.assign(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) (i % 2 ? s.odd_ : s.even_)[i] = s.coefficients_[i];
  return s;
}

DriftSpec DriftSpec::callable(std::function<double(double)> f,
                              std::function<double(double)> f_prime, DriftConstants constants,
                              std::string name) {
  validate(constants);
  if (!f || !f_prime) throw DomainError("DriftSpec: callable drift needs f and f'");
  if (!std::isfinite(f(0.0))) throw DomainError("DriftSpec: f(0) is not finite");
  DriftSpec s;
  s.name_ = std::move(name);
  s.constants_ = constants;
  s.f_ = std::move(f);
  s.f_prime_ = std::move(f_prime);
  return s;
}

double DriftSpec::f(double x) const {
  if (f_) return f_(x);
  double acc = 0.0;
  for (int i = degree_; i >= 0; --i) acc = acc * x + coefficients_[static_cast<std::size_t>(i)];
  return acc;
}

double DriftSpec::f_prime(double x) const {
  if (f_prime_) return f_prime_(x);
  double acc = 0.0;
  for (int i = degree_; i >= 1; --i) {
    acc = acc * x + i * coefficients_[static_cast<std::size_t>(i)];
  }
  return acc;
}

double DriftSpec::f_odd(double x) const {
  if (f_) return 0.5 * (f_(x) - f_(-x));
  return horner(odd_, x);
}

double DriftSpec::f_even(double x) const {
  if (f_) return 0.5 * (f_(x) + f_(-x));
  return horner(even_, x);
}

double DriftSpec::f_odd_prime(double x) const {
  if (f_prime_) return 0.5 * (f_prime_(x) + f_prime_(-x));
  return horner_prime(odd_, x);
}

double DriftSpec::f_even_prime(double x) const {
  if (f_prime_) return 0.5 * (f_prime_(x) - f_prime_(-x));
  return horner_prime(even_, x);
}

bool DriftSpec::has_even_part() const noexcept {
  return f_ || std::any_of(even_.begin(), even_.end(), [](double a) { return a != 0.0; });
}

int DriftSpec::projection_points(int n_modes) const {
  if (!is_polynomial()) return 8 * n_modes;
  // Odd part: f(u) e_k is a cosine sum of frequency <= (d+1) N, exact on the
  // sine grid below 2(J+1). Even part of degree e: a polynomial of degree
  // (e+1) N - 1 in cos(pi x), exact under the cosine rule up to J + 1.
  int d = std::max(degree_, 1);
  for (int e = degree_; e >= 2; --e) {
    if (e % 2 == 0 && coefficients_[static_cast<std::size_t>(e)] != 0.0) {
      d = std::max(d, e + 1);
      break;
    }
  }
  return dealias_points(n_modes, d);
}

DriftSpec builtin(const std::string& name) {
  if (name == "allen_cahn") {
    return DriftSpec::polynomial({0.0, 1.0, 0.0, -1.0}, {1.0, 0.25, 4.0, 3.0}, name);
  }
  if (name == "paper_quintic") {
    // sup (f(x)-f(y))/(x-y) + L_f (x-y)^4 = max f' = 0.216 at x = 3/5 for
    // L_f = 1/32; b rounded up. |f'| <= 8(1 + x^4) from 4|x|^3 <= 3x^4 + 1.
    return DriftSpec::polynomial({0.0, 0.0, 0.0, 0.0, 1.0, -1.0}, {0.25, 1.0 / 32.0, 6.0, 8.0},
                                 name);
  }
  if (name == "zero") return DriftSpec::polynomial({0.0}, {0.0, 1.0, 2.0, 1.0}, name);
  throw ConfigError("unknown built-in drift '" + name + "'");
}

MonotoneReport check_monotone(const DriftSpec& spec, std::uint64_t n_pairs, double lo, double hi,
                              std::uint64_t seed) {
  if (n_pairs < 1) throw DomainError("check_monotone: n_pairs must be >= 1");
  if (!(lo <= hi)) throw DomainError("check_monotone: empty box");
  auto rng = sample_stream(seed, 0);
  std::uniform_real_distribution<double> unif(lo, hi);
  const auto& c = spec.constants();

  MonotoneReport r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  r.worst_derivative_margin = std::numeric_limits<double>::infinity();
  auto derivative_margin = [&](double x) {
    return c.Lf_tilde * (1.0 + std::pow(std::abs(x), c.q - 2.0)) - std::abs(spec.f_prime(x));
  };
  for (std::uint64_t i = 0; i < n_pairs; ++i) {
    const double x = unif(rng);
    const double y = unif(rng);
    const double d = x - y;
    const double margin =
        c.b * d * d - c.L_f * std::pow(std::abs(d), c.q) - (spec.f(x) - spec.f(y)) * d;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.witness_x = x;
      r.witness_y = y;
    }
    for (double p : {x, y}) {
      const double dm = derivative_margin(p);
      if (dm < r.worst_derivative_margin) {
        r.worst_derivative_margin = dm;
        r.derivative_witness = p;
      }
    }
  }
  r.derivative_holds = r.worst_derivative_margin >= kMarginTolerance;
  r.holds = r.worst_margin >= kMarginTolerance && r.derivative_holds;
  return r;
}

GalerkinProjector::GalerkinProjector(DriftSpec spec, int n_modes) : spec_(std::move(spec)) {
  if (n_modes < 1) throw DomainError("GalerkinProjector: N must be >= 1");
  const int J = spec_.projection_points(n_modes);
  transform_ = sine_transform(J);
  if (spec_.has_even_part()) even_rule_ = cosine_rule(J);
}

void GalerkinProjector::project(std::span<double> u, std::span<double> out,
                                std::span<double> scratch) const {
  if (even_rule_) {
    const auto& rho = even_rule_->interior;
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = spec_.f_odd(u[j]) + rho[j] * spec_.f_even(u[j]);
  } else {
    for (double& v : u) v = spec_.f_odd(v);
  }
  transform_->analyze(u, out, scratch);
  // u vanishes at both ends, so the endpoint term only sees f(0).
  const double f0 = even_rule_ ? spec_.f_even(0.0) : 0.0;
  if (f0 != 0.0) {
    for (std::size_t k = 1; k <= out.size(); k += 2) {
      out[k - 1] += 2.0 * static_cast<double>(k) * even_rule_->endpoint * f0;
    }
  }
}

void GalerkinProjector::derivative_weights(std::span<const double> u, std::span<double> d) const {
  if (even_rule_) {
    const auto& rho = even_rule_->interior;
    for (std::size_t j = 0; j < u.size(); ++j) {
      d[j] = spec_.f_odd_prime(u[j]) + rho[j] * spec_.f_even_prime(u[j]);
    }
  } else {
    for (std::size_t j = 0; j < u.size(); ++j) d[j] = spec_.f_odd_prime(u[j]);
  }
}

SpectralField nemytskii_project(const SpectralField& u, const DriftSpec& spec, int n_modes) {
  if (n_modes < 1) throw DomainError("nemytskii_project: N must be >= 1");
  const GalerkinProjector proj(spec, std::max(u.n_modes(), n_modes));
  const auto J = static_cast<std::size_t>(proj.points());
  std::vector<double> grid(J), scratch(2 * J);
  proj.transform().synthesize(u.coeffs(), grid, scratch);
  std::vector<double> out(static_cast<std::size_t>(n_modes));
  proj.project(grid, out, scratch);
  return SpectralField(std::move(out));
}

}  // namespace spdemono
