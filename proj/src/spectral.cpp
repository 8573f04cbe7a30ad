#include "spdemono/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "spdemono/errors.hpp"

namespace spdemono {

namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

SpectralField::SpectralField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw DomainError("SpectralField: n_modes must be >= 1");
  require_finite(coeffs_, "SpectralField");
}

SpectralField SpectralField::zeros(int n_modes) {
  if (n_modes < 1) throw DomainError("SpectralField: n_modes must be >= 1");
  return SpectralField(std::vector<double>(static_cast<std::size_t>(n_modes), 0.0));
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  std::vector<double> out(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) out[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) out[i] += b.coeffs_[i];
  return SpectralField(std::move(out));
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  std::vector<double> out(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) out[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) out[i] -= b.coeffs_[i];
  return SpectralField(std::move(out));
}

SpectralField operator*(double s, const SpectralField& a) {
  std::vector<double> out(a.coeffs_);
  for (double& c : out) c *= s;
  return SpectralField(std::move(out));
}

GridField::GridField(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("GridField: j_points must be >= 1");
  require_finite(values_, "GridField");
}

SineTransform::SineTransform(int j_points) : j_points_(j_points), plan_(nullptr) {
  if (j_points < 1) throw ResolutionError("SineTransform: J must be >= 1");
  std::vector<double> in(static_cast<std::size_t>(j_points)), out(in.size());
  std::lock_guard lock(planner_mutex());
  // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding, fixed
  // from run to run.
  plan_ = fftw_plan_r2r_1d(j_points, in.data(), out.data(), FFTW_RODFT00,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_ == nullptr) throw ResourceError("SineTransform: FFTW planning failed");
}

SineTransform::~SineTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void SineTransform::synthesize(std::span<const double> coeffs, std::span<double> values,
                               std::span<double> scratch) const {
  const auto J = static_cast<std::size_t>(j_points_);
  std::fill(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(J), 0.0);
  std::copy(coeffs.begin(), coeffs.end(), scratch.begin());
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), scratch.data(), values.data());
  // RODFT00 computes 2 sum x_k sin(...).
  const double scale = std::numbers::sqrt2 / 2.0;
  for (std::size_t j = 0; j < J; ++j) values[j] *= scale;
}

void SineTransform::analyze(std::span<const double> values, std::span<double> coeffs,
                            std::span<double> scratch) const {
  const auto J = static_cast<std::size_t>(j_points_);
  // FFTW takes a non-const input pointer; copy to keep the caller's data intact.
  double* in = scratch.data();
  double* out = scratch.data() + J;
  std::copy_n(values.begin(), J, in);
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), in, out);
  const double scale = std::numbers::sqrt2 / (2.0 * static_cast<double>(J + 1));
  for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = scale * out[k];
}

std::shared_ptr<const SineTransform> sine_transform(int j_points) {
  static std::mutex cache_mutex;
  static std::map<int, std::shared_ptr<const SineTransform>> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(j_points);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const SineTransform>(j_points);
  cache.emplace(j_points, t);
  return t;
}

double eigenvalue(int k) {
  if (k < 1) throw DomainError("eigenvalue: k must be >= 1, got " + std::to_string(k));
  const double kpi = static_cast<double>(k) * std::numbers::pi;
  return kpi * kpi;
}

std::shared_ptr<const CosineRule> cosine_rule(int j_points) {
  if (j_points < 1) throw ResolutionError("cosine_rule: J must be >= 1");
  static std::mutex cache_mutex;
  static std::map<int, std::shared_ptr<const CosineRule>> cache;
  std::lock_guard lock(cache_mutex);
  if (auto it = cache.find(j_points); it != cache.end()) return it->second;

  const int n = j_points + 1;
  std::vector<double> cos_table(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) cos_table[static_cast<std::size_t>(r)] = std::cos(2.0 * std::numbers::pi * r / n);
  // w_j = (c_j/n) (1 - sum_{m<=n/2} b_m cos(2 m theta_j) / (4m^2 - 1))
  auto weight = [&](int j) {
    double s = 0.0;
    for (int m = 1; 2 * m <= n; ++m) {
      const double bm = 2 * m == n ? 1.0 : 2.0;
      const auto r = static_cast<std::size_t>((static_cast<long long>(m) * j) % n);
      s += bm * cos_table[r] / (4.0 * m * m - 1.0);
    }
    return (j == 0 || j == n ? 1.0 : 2.0) / n * (1.0 - s);
  };
  auto rule = std::make_shared<CosineRule>();
  rule->interior.resize(static_cast<std::size_t>(j_points));
  for (int j = 1; j <= j_points; ++j) {
    const double theta = std::numbers::pi * j / n;
    rule->interior[static_cast<std::size_t>(j - 1)] = n * weight(j) / (std::numbers::pi * std::sin(theta));
  }
  rule->endpoint = std::numbers::sqrt2 / std::numbers::pi * weight(0);
  cache.emplace(j_points, rule);
  return rule;
}

int dealias_points(int n_modes, int degree) {
  if (n_modes < 1 || degree < 1) throw DomainError("dealias_points: arguments must be >= 1");
  const long long need = static_cast<long long>(n_modes) * degree;
  long long j = 1;
  while (j < need) j = 2 * j + 1;
  return static_cast<int>(j);
}

GridField synthesize(const SpectralField& field, int j_points) {
  if (j_points < field.n_modes()) {
    throw ResolutionError("synthesize: J=" + std::to_string(j_points) + " < n_modes=" +
                          std::to_string(field.n_modes()));
  }
  auto t = sine_transform(j_points);
  std::vector<double> values(static_cast<std::size_t>(j_points)), scratch(values.size());
  t->synthesize(field.coeffs(), values, scratch);
  return GridField(std::move(values));
}

SpectralField analyze(const GridField& grid, int n_modes) {
  if (n_modes < 1) throw DomainError("analyze: N must be >= 1");
  if (n_modes > grid.j_points()) {
    throw ResolutionError("analyze: N=" + std::to_string(n_modes) + " > J=" +
                          std::to_string(grid.j_points()));
  }
  auto t = sine_transform(grid.j_points());
  std::vector<double> coeffs(static_cast<std::size_t>(n_modes));
  std::vector<double> scratch(2 * static_cast<std::size_t>(grid.j_points()));
  t->analyze(grid.values(), coeffs, scratch);
  return SpectralField(std::move(coeffs));
}

SpectralField project(const SpectralField& field, int n_modes) {
  if (n_modes < 1) throw DomainError("project: N must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(n_modes), 0.0);
  const auto keep = std::min<std::size_t>(out.size(), field.coeffs().size());
  std::copy_n(field.coeffs().begin(), keep, out.begin());
  return SpectralField(std::move(out));
}

double l2_norm(const SpectralField& field) {
  double s = 0.0;
  for (double c : field.coeffs()) s += c * c;
  return std::sqrt(s);
}

double sobolev_norm(const SpectralField& field, double theta) {
  if (theta < 0.0) throw DomainError("sobolev_norm: theta must be >= 0");
  if (theta == 0.0) return l2_norm(field);
  double s = 0.0;
  for (int k = 1; k <= field.n_modes(); ++k) {
    s += std::pow(eigenvalue(k), theta) * field[k] * field[k];
  }
  return std::sqrt(s);
}

double lq_norm(const SpectralField& field, double q, int j_points) {
  if (!(q >= 2.0)) throw DomainError("lq_norm: q must be >= 2");
  const double need = std::ceil(q) * field.n_modes();
  if (static_cast<double>(j_points) < need) {
    throw ResolutionError("lq_norm: J=" + std::to_string(j_points) + " too small for q-th power");
  }
  const GridField g = synthesize(field, j_points);
  double s = 0.0;
  for (double v : g.values()) s += std::pow(std::abs(v), q);
  return std::pow(s / (j_points + 1), 1.0 / q);
}

double lq_norm(const SpectralField& field, double q) {
  if (!(q >= 2.0)) throw DomainError("lq_norm: q must be >= 2");
  return lq_norm(field, q, dealias_points(field.n_modes(), static_cast<int>(std::ceil(q))));
}

}  // namespace spdemono
