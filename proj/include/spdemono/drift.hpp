#pragma once

// Monotone drift f with the one-sided condition
//   (f(x) - f(y))(x - y) <= b|x - y|^2 - L_f |x - y|^q
// and derivative growth |f'(x)| <= Lf_tilde (1 + |x|^{q-2}).

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spdemono/spectral.hpp"

namespace spdemono {

struct DriftConstants {
  double b = 0.0;
  double L_f = 1.0;
  double q = 2.0;
  double Lf_tilde = 1.0;
};

class DriftSpec {
 public:
  /// f(x) = sum_i a_i x^i. Throws DomainError on invalid constants.
  static DriftSpec polynomial(std::vector<double> coefficients, DriftConstants constants,
                              std::string name = "polynomial");
  /// Pointwise-callable drift; P_N F is then computed on J = 8 N points and is
  /// not exact.
  static DriftSpec callable(std::function<double(double)> f, std::function<double(double)> f_prime,
                            DriftConstants constants, std::string name = "callable");

  const std::string& name() const noexcept { return name_; }
  const DriftConstants& constants() const noexcept { return constants_; }
  double b() const noexcept { return constants_.b; }
  double L_f() const noexcept { return constants_.L_f; }
  double q() const noexcept { return constants_.q; }
  double Lf_tilde() const noexcept { return constants_.Lf_tilde; }

  bool is_polynomial() const noexcept { return !f_; }
  /// Polynomial degree (trailing zeros ignored); -1 for the zero polynomial
  /// and for callables.
  int degree() const noexcept { return degree_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }

  double f(double x) const;
  double f_prime(double x) const;
  /// Odd and even parts of f and their derivatives.
  double f_odd(double x) const;
  double f_even(double x) const;
  double f_odd_prime(double x) const;
  double f_even_prime(double x) const;
  /// False for polynomials whose even coefficients all vanish.
  bool has_even_part() const noexcept;

  /// Grid size used to form P_N F(u) for a field with n_modes modes:
  /// dealias_points(N, d) with d the degree, raised to e + 1 when the top
  /// even degree e exceeds the degree minus one.
  int projection_points(int n_modes) const;

 private:
  DriftSpec() = default;
  std::string name_;
  DriftConstants constants_;
  std::vector<double> coefficients_;
  std::vector<double> odd_;
  std::vector<double> even_;
  int degree_ = -1;
  std::function<double(double)> f_;
  std::function<double(double)> f_prime_;
};

inline double eval_f(const DriftSpec& spec, double x) { return spec.f(x); }
inline double eval_f_prime(const DriftSpec& spec, double x) { return spec.f_prime(x); }

/// "allen_cahn": x - x^3 with (b, L_f, q, Lf_tilde) = (1, 1/4, 4, 3).
/// "paper_quintic": x^4 - x^5 with (1/4, 1/32, 6, 8), certified by check_monotone.
/// "zero": f = 0 with (0, 1, 2, 1).
/// Throws ConfigError for unknown names.
DriftSpec builtin(const std::string& name);

struct MonotoneReport {
  bool holds = true;
  double worst_margin = 0.0;
  double witness_x = 0.0;
  double witness_y = 0.0;
  /// Derivative growth check, min over sampled x of Lf_tilde(1+|x|^{q-2}) - |f'(x)|.
  bool derivative_holds = true;
  double worst_derivative_margin = 0.0;
  double derivative_witness = 0.0;
};

/// Samples n_pairs pairs uniformly in [lo, hi]^2 and reports the worst
/// margin b|x-y|^2 - L_f|x-y|^q - (f(x)-f(y))(x-y). holds iff every margin,
/// including the derivative-growth margins at the sampled points, is >= -1e-9.
MonotoneReport check_monotone(const DriftSpec& spec, std::uint64_t n_pairs, double lo, double hi,
                              std::uint64_t seed);

/// P_N F on the grid J = spec.projection_points(n_modes). The odd part of f(u)
/// e_k expands in cosines of pi x and is integrated by the sine rule; the
/// even part is a polynomial in cos(pi x) and uses the CosineRule on the same
/// nodes. Both are exact for polynomial f.
class GalerkinProjector {
 public:
  GalerkinProjector(DriftSpec spec, int n_modes);

  int points() const noexcept { return transform_->points(); }
  const SineTransform& transform() const noexcept { return *transform_; }
  const DriftSpec& spec() const noexcept { return spec_; }

  /// u holds u(x_j) and is overwritten; out receives the first out.size()
  /// coefficients of P_N F(u). scratch.size() >= 2J.
  void project(std::span<double> u, std::span<double> out, std::span<double> scratch) const;
  /// d_j such that d/du of project() is (1/(J+1)) sum_j d_j e_k(x_j) e_l(x_j).
  void derivative_weights(std::span<const double> u, std::span<double> d) const;

 private:
  DriftSpec spec_;
  std::shared_ptr<const SineTransform> transform_;
  std::shared_ptr<const CosineRule> even_rule_;
};

/// First n_modes sine coefficients of x -> f(u(x)) via GalerkinProjector on
/// J = spec.projection_points(max(u.n_modes(), n_modes)).
SpectralField nemytskii_project(const SpectralField& u, const DriftSpec& spec, int n_modes);

}  // namespace spdemono
