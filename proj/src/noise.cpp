#include "spdemono/noise.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <new>
#include <numbers>
#include <ostream>
#include <string>

#include "spdemono/errors.hpp"
#include "spdemono/parallel.hpp"
#include "spdemono/spectral.hpp"

namespace spdemono {

namespace {

constexpr std::uint64_t kMaxPathEntries = std::uint64_t{1} << 30;  // 8 GiB of doubles

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

TimeGrid::TimeGrid(double final_time, int steps) : final_time_(final_time), steps_(steps) {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw DomainError("TimeGrid: T must be positive and finite");
  }
  if (steps < 1) throw DomainError("TimeGrid: M must be >= 1");
}

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t sample_index) {
  std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(sample_index + 1)),
                    sample_index};
  return std::mt19937_64(seq);
}

OuPathSet::OuPathSet(int n_modes, TimeGrid grid, int n_samples, std::uint64_t seed,
                     std::uint64_t first_sample, std::vector<double> values)
    : n_modes_(n_modes),
      grid_(grid),
      n_samples_(n_samples),
      seed_(seed),
      first_sample_(first_sample),
      values_(std::move(values)) {
  if (n_modes < 1 || n_samples < 1) throw DomainError("OuPathSet: N and n_samples must be >= 1");
  const auto expect = static_cast<std::size_t>(n_samples) *
                      static_cast<std::size_t>(grid.steps() + 1) * static_cast<std::size_t>(n_modes);
  if (values_.size() != expect) throw DomainError("OuPathSet: value count does not match shape");
}

std::span<const double> OuPathSet::at(int s, int m) const {
  const auto row = static_cast<std::size_t>(s) * static_cast<std::size_t>(grid_.steps() + 1) +
                   static_cast<std::size_t>(m);
  return std::span<const double>(values_).subspan(row * static_cast<std::size_t>(n_modes_),
                                                  static_cast<std::size_t>(n_modes_));
}

double ou_marginal_variance(int k, double t) {
  if (t < 0.0) throw DomainError("ou_marginal_variance: t must be >= 0");
  const double lambda = eigenvalue(k);
  return -std::expm1(-2.0 * lambda * t) / (2.0 * lambda);
}

OuPathSet simulate(int n_modes, const TimeGrid& grid, int n_samples, std::uint64_t seed,
                   std::uint64_t first_sample) {
  if (n_modes < 1 || n_samples < 1) throw DomainError("simulate: N and n_samples must be >= 1");
  const std::uint64_t rows = static_cast<std::uint64_t>(grid.steps()) + 1;
  const std::uint64_t entries = static_cast<std::uint64_t>(n_modes) * rows *
                                static_cast<std::uint64_t>(n_samples);
  if (entries > kMaxPathEntries) {
    throw ResourceError("simulate: N*(M+1)*n_samples = " + std::to_string(entries) +
                        " exceeds the path-set limit");
  }
  std::vector<double> values;
  try {
    values.assign(static_cast<std::size_t>(entries), 0.0);
  } catch (const std::bad_alloc&) {
    throw ResourceError("simulate: out of memory allocating " + std::to_string(entries) + " values");
  }

  const double tau = grid.tau();
  std::vector<double> decay(static_cast<std::size_t>(n_modes));
  std::vector<double> sigma(decay.size());
  for (int k = 1; k <= n_modes; ++k) {
    decay[static_cast<std::size_t>(k - 1)] = std::exp(-eigenvalue(k) * tau);
    sigma[static_cast<std::size_t>(k - 1)] = std::sqrt(ou_marginal_variance(k, tau));
  }

  const auto N = static_cast<std::size_t>(n_modes);
  const auto per_sample = static_cast<std::size_t>(rows) * N;
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t s) {
    auto rng = sample_stream(seed, first_sample + s);
    std::normal_distribution<double> normal;
    double* w = values.data() + s * per_sample;
    for (std::size_t m = 1; m < rows; ++m) {
      const double* prev = w + (m - 1) * N;
      double* cur = w + m * N;
      for (std::size_t k = 0; k < N; ++k) cur[k] = decay[k] * prev[k] + sigma[k] * normal(rng);
    }
  });
  return OuPathSet(n_modes, grid, n_samples, seed, first_sample, std::move(values));
}

OuPathSet restrict(const OuPathSet& paths, const TimeGrid& coarse, int n_modes) {
  const TimeGrid& fine = paths.grid();
  if (coarse.final_time() != fine.final_time()) {
    throw IncompatibleGridError("restrict: final times differ");
  }
  if (fine.steps() % coarse.steps() != 0) {
    throw IncompatibleGridError("restrict: coarse M=" + std::to_string(coarse.steps()) +
                                " does not divide fine M=" + std::to_string(fine.steps()));
  }
  if (n_modes < 1 || n_modes > paths.n_modes()) {
    throw IncompatibleGridError("restrict: N'=" + std::to_string(n_modes) + " outside [1, " +
                                std::to_string(paths.n_modes()) + "]");
  }
  const int stride = fine.steps() / coarse.steps();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(paths.n_samples()) *
                 static_cast<std::size_t>(coarse.steps() + 1) * static_cast<std::size_t>(n_modes));
  for (int s = 0; s < paths.n_samples(); ++s) {
    for (int m = 0; m <= coarse.steps(); ++m) {
      auto row = paths.at(s, m * stride);
      values.insert(values.end(), row.begin(), row.begin() + n_modes);
    }
  }
  return OuPathSet(n_modes, coarse, paths.n_samples(), paths.seed(), paths.first_sample(),
                   std::move(values));
}

double truncation_error_analytic(int n_modes, double t, int k_max) {
  if (n_modes < 1) throw DomainError("truncation_error_analytic: N must be >= 1");
  if (k_max <= n_modes) throw DomainError("truncation_error_analytic: K_max must exceed N");
  if (!(t > 0.0)) throw DomainError("truncation_error_analytic: t must be positive");
  // Smallest terms first.
  double sum = 0.0;
  for (int k = k_max; k > n_modes; --k) sum += ou_marginal_variance(k, t);
  return sum;
}

double truncation_tail_bound(int k_max) {
  if (k_max < 1) throw DomainError("truncation_tail_bound: K_max must be >= 1");
  return 1.0 / (2.0 * std::numbers::pi * std::numbers::pi * k_max);
}

void write_csv(const OuPathSet& paths, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << paths.n_modes() << ',' << paths.grid().steps() << ',' << paths.grid().final_time() << ','
     << paths.n_samples() << ',' << paths.seed() << '\n';
  for (int s = 0; s < paths.n_samples(); ++s) {
    for (int m = 0; m <= paths.grid().steps(); ++m) {
      auto row = paths.at(s, m);
      for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
      os << '\n';
    }
  }
}

}  // namespace spdemono
