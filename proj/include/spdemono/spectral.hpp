#pragma once

// Sine eigenbasis arithmetic on (0,1) with homogeneous Dirichlet boundary.
//
// A SpectralField holds coefficients c_1..c_N of u(x) = sum_k c_k e_k(x),
// e_k(x) = sqrt(2) sin(k pi x). A GridField holds values at the interior
// nodes x_j = j/(J+1), j = 1..J. On that grid the discrete sine transform pair
// is exactly orthogonal, so analyze(synthesize(f, J), N) == f for N <= J and
// the rectangle rule with weight 1/(J+1) integrates sine products of total
// frequency below 2(J+1) exactly.

#include <memory>
#include <span>
#include <vector>

namespace spdemono {

class SpectralField {
 public:
  /// Throws DomainError on an empty or non-finite coefficient vector.
  explicit SpectralField(std::vector<double> coeffs);
  static SpectralField zeros(int n_modes);

  int n_modes() const noexcept { return static_cast<int>(coeffs_.size()); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  /// 1-based mode index.
  double operator[](int k) const { return coeffs_[static_cast<std::size_t>(k - 1)]; }

  /// Sum/difference zero-pad the shorter operand.
  friend SpectralField operator+(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator*(double s, const SpectralField& a);

 private:
  std::vector<double> coeffs_;
};

class GridField {
 public:
  explicit GridField(std::vector<double> values);

  int j_points() const noexcept { return static_cast<int>(values_.size()); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](int j) const { return values_[static_cast<std::size_t>(j - 1)]; }
  /// Node x_j for 1-based j.
  double node(int j) const noexcept { return static_cast<double>(j) / (j_points() + 1); }

 private:
  std::vector<double> values_;
};

/// DST-I pair on a fixed interior grid of J points. Immutable after
/// construction; the transform methods may be called concurrently provided
/// each caller passes its own scratch.
class SineTransform {
 public:
  explicit SineTransform(int j_points);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  int points() const noexcept { return j_points_; }

  /// values[j] = sum_{k<=coeffs.size()} c_k sqrt(2) sin(k pi x_j).
  /// values.size() == J, scratch.size() >= J.
  void synthesize(std::span<const double> coeffs, std::span<double> values,
                  std::span<double> scratch) const;
  /// coeffs[k] = sqrt(2)/(J+1) sum_j values_j sin(k pi x_j) for k <= coeffs.size().
  /// scratch.size() >= 2J.
  void analyze(std::span<const double> values, std::span<double> coeffs,
               std::span<double> scratch) const;

 private:
  int j_points_;
  void* plan_;  // fftw_plan
};

/// Shared transform for J points. Plans are created once per size.
std::shared_ptr<const SineTransform> sine_transform(int j_points);

/// Weights for int_0^1 g(x) e_k(x) dx when g is a polynomial in cos(pi x) of
/// degree <= J + 1: Clenshaw-Curtis in s = cos(pi x) on s_j = cos(pi j/(J+1)),
/// j = 0..J+1. With v_j = interior[j-1] g(x_j), the integral equals
/// analyze(v)_k + k * endpoint * (g(0) + (-1)^{k-1} g(1)).
struct CosineRule {
  std::vector<double> interior;
  double endpoint = 0.0;
};

/// Cached CosineRule for J points.
std::shared_ptr<const CosineRule> cosine_rule(int j_points);

/// lambda_k = (k pi)^2.
double eigenvalue(int k);

/// Smallest J = 2^m - 1 with J >= degree * n_modes.
int dealias_points(int n_modes, int degree);

GridField synthesize(const SpectralField& field, int j_points);
SpectralField analyze(const GridField& grid, int n_modes);

/// P_N: truncate, or zero-pad when n_modes exceeds the field's length.
SpectralField project(const SpectralField& field, int n_modes);

double l2_norm(const SpectralField& field);
/// ||(-A)^{theta/2} u|| = sqrt(sum lambda_k^theta c_k^2).
double sobolev_norm(const SpectralField& field, double theta);
/// Rectangle-rule L^q norm on J interior points. Requires q >= 2 and
/// J >= ceil(q) * n_modes.
double lq_norm(const SpectralField& field, double q, int j_points);
/// Same, with J = dealias_points(n_modes, ceil(q)).
double lq_norm(const SpectralField& field, double q);

}  // namespace spdemono
