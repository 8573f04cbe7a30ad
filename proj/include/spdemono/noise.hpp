#pragma once

// Exact simulation of the spectrally truncated Ornstein-Uhlenbeck process
// W_A^N(t) = sum_{k<=N} w_k(t) e_k, with dw_k = -lambda_k w_k dt + d beta_k.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace spdemono {

/// Uniform grid t_m = m T / M, m = 0..M.
class TimeGrid {
 public:
  TimeGrid(double final_time, int steps);

  double final_time() const noexcept { return final_time_; }
  int steps() const noexcept { return steps_; }
  double tau() const noexcept { return final_time_ / steps_; }
  double node(int m) const noexcept { return final_time_ * m / steps_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double final_time_;
  int steps_;
};

/// Per-sample stream used for sample `sample_index` under `seed`. Depends
/// only on (seed, sample_index), never on scheduling.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t sample_index);

/// Mode values w[s][m][k] of n_samples OU paths. Sample s was drawn from
/// sample_stream(seed, first_sample + s).
class OuPathSet {
 public:
  OuPathSet(int n_modes, TimeGrid grid, int n_samples, std::uint64_t seed,
            std::uint64_t first_sample, std::vector<double> values);

  int n_modes() const noexcept { return n_modes_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  int n_samples() const noexcept { return n_samples_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t first_sample() const noexcept { return first_sample_; }

  /// Modes 1..N of sample s at node m.
  std::span<const double> at(int s, int m) const;
  /// Mode k (1-based) of sample s at node m.
  double value(int s, int m, int k) const { return at(s, m)[static_cast<std::size_t>(k - 1)]; }
  std::span<const double> raw() const noexcept { return values_; }

  friend bool operator==(const OuPathSet&, const OuPathSet&) = default;

 private:
  int n_modes_;
  TimeGrid grid_;
  int n_samples_;
  std::uint64_t seed_;
  std::uint64_t first_sample_;
  std::vector<double> values_;
};

/// Var w_k(t) = (1 - exp(-2 lambda_k t)) / (2 lambda_k).
double ou_marginal_variance(int k, double t);

/// Exact conditional recursion w_{m+1} = e^{-lambda tau} w_m + sigma(tau) xi,
/// normals consumed in (m, k) order per sample stream.
OuPathSet simulate(int n_modes, const TimeGrid& grid, int n_samples, std::uint64_t seed,
                   std::uint64_t first_sample = 0);

/// Subsample onto a coarser nested grid and keep the first n_modes modes.
OuPathSet restrict(const OuPathSet& paths, const TimeGrid& coarse, int n_modes);

/// sum_{k=N+1}^{K_max} (1 - exp(-2 lambda_k t)) / (2 lambda_k).
double truncation_error_analytic(int n_modes, double t, int k_max);
/// Bound on the omitted tail: sum_{k>K_max} 1/(2 lambda_k) <= 1/(2 pi^2 K_max).
double truncation_tail_bound(int k_max);

/// Debug dump: one header line "N,M,T,n_samples,seed" then one row per
/// (sample, node) holding the N mode values.
void write_csv(const OuPathSet& paths, std::ostream& os);

}  // namespace spdemono
