#pragma once

// Monte Carlo strong-error experiments: coupled reference/coarse runs, the
// discrete mixed norms sup_m E||e_m||^2 and tau sum_m E||e_m||_{L^q}^q,
// log-log rate fits, Hoelder exponent estimates and CSV/JSON plumbing.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spdemono/drift.hpp"
#include "spdemono/scheme.hpp"

namespace spdemono {

enum class SweepKind { kTau, kModes };

struct Sweep {
  SweepKind kind = SweepKind::kTau;
  /// Coarse M values (kTau) or coarse N values (kModes).
  std::vector<int> values;
};

struct ExperimentConfig {
  std::string drift_name = "paper_quintic";
  /// Set for explicit polynomial drifts; otherwise builtin(drift_name).
  std::optional<DriftSpec> drift_override;
  double final_time = 1.0;
  /// "inverse_square" (sum k^{-2} e_k), "zero", or explicit coefficients.
  std::string u0_kind = "inverse_square";
  std::vector<double> u0_coefficients;
  int reference_modes = 128;
  int reference_steps = 2048;
  Sweep sweep{SweepKind::kTau, {128, 256, 512, 1024}};
  int n_samples = 100;
  std::uint64_t seed = 42;
  double q = 6.0;
  std::string output = "out";
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  NonlinearSolver solver = NonlinearSolver::kNewton;

  DriftSpec drift() const;
  SpectralField initial_datum() const;
  SchemeConfig reference_scheme() const;
  /// Coarse scheme for one sweep value.
  SchemeConfig coarse_scheme(int sweep_value) const;
  /// Throws ConfigError on broken nesting, n_samples < 2, q < 2, etc.
  void validate() const;

  /// Strict JSON parse; unknown keys are rejected with ConfigError.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  /// "paper", "desk" (temporal) or "desk-spatial".
  static ExperimentConfig preset(const std::string& name);
  std::string to_json() const;
};

/// Per-sample errors at the coarse nodes m = 0..M.
struct ErrorSample {
  std::uint64_t sample_index = 0;
  std::vector<double> sq_l2;   ///< ||u_ref(t_m) - u_N^m||^2
  std::vector<double> lq_pow;  ///< ||u_ref(t_m) - u_N^m||_{L^q}^q
};

/// Coupled errors for one coarse configuration.
std::vector<ErrorSample> strong_error(const ExperimentConfig& cfg, const SchemeConfig& coarse);
/// Coupled errors for several coarse configurations. Each sample drives the
/// reference and every coarse run with the same noise path; result[i] belongs
/// to coarse[i].
std::vector<std::vector<ErrorSample>> strong_error(const ExperimentConfig& cfg,
                                                   const std::vector<SchemeConfig>& coarse);

struct MixedNorms {
  double E1 = 0.0;  ///< sup_m mean ||e_m||^2
  double E2 = 0.0;  ///< tau sum_m mean ||e_m||_q^q
  double E1_se = 0.0;
  double E2_se = 0.0;
  double err1 = 0.0;  ///< sqrt(E1)
  double err2 = 0.0;  ///< E2^{1/q}
  double err1_se = 0.0;
  double err2_se = 0.0;
  int sup_node = 0;
};

MixedNorms mixed_norms(const std::vector<ErrorSample>& samples, double tau, double q);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log2(err) against log2(h). Needs >= 3 positive points.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct RatePoint {
  std::string sweep_param;  ///< "tau" or "N"
  double value = 0.0;       ///< tau or N
  int n_samples = 0;
  std::uint64_t seed = 0;
  double err1 = 0.0, err1_se = 0.0, err2 = 0.0, err2_se = 0.0;

  /// Mesh size used for fitting: tau, or 1/N.
  double mesh() const { return sweep_param == "N" ? 1.0 / value : value; }
};

struct RateReport {
  std::vector<RatePoint> points;
  std::optional<RateFit> fit_err1;
  std::optional<RateFit> fit_err2;
  std::uint64_t seed = 0;
  int n_samples = 0;
  std::string started_at;
  std::string finished_at;
};

/// Fits err1 and err2 against mesh() when there are >= 3 points.
void fit_report(RateReport& report);

RateReport temporal_study(const ExperimentConfig& cfg);
RateReport spatial_study(const ExperimentConfig& cfg);
/// Dispatches on cfg.sweep.kind.
RateReport run_study(const ExperimentConfig& cfg);

/// Header: sweep_param,value,n_samples,seed,err1,err1_se,err2,err2_se
void write_rate_csv(const RateReport& report, const std::string& path);
std::vector<RatePoint> read_rate_csv(const std::string& path);

struct HolderConfig {
  std::string drift_name = "zero";
  double final_time = 1.0;
  int n_modes = 256;
  int steps = 1024;
  /// Empty means u0 = 0.
  std::vector<double> u0_coefficients;
  bool with_noise = true;
  int n_samples = 32;
  std::uint64_t seed = 7;
};

struct HolderEstimate {
  double exponent_u = 0.0;       ///< slope of log E||u(t+d)-u(t)||^2 vs log d
  double exponent_grad_z = 0.0;  ///< slope of log E||grad z(t+d)-grad z(t)||^2 vs log d
  std::vector<double> lags;
  std::vector<double> mean_sq_u;
  std::vector<double> mean_sq_grad_z;
};

/// Lags must be positive multiples of the step tau and below T.
HolderEstimate holder_estimate(const HolderConfig& cfg, const std::vector<double>& lags);

/// Closed-form E||W(t+d) - W(t)||^2 for the N-mode OU process started at 0.
double ou_increment_analytic(int n_modes, double t, double lag);

struct OuCheck {
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double analytic = 0.0;
  double upper_bound = 0.0;  ///< N^{-1} / (2 pi^2)
  double lower_bound = 0.0;  ///< t N^{-1} / (2(1 + 2 pi^2 t))
  bool within_3se = false;
  bool bounds_hold = false;
};

/// Monte Carlo estimate of E||W^{N_ref}(t) - W^N(t)||^2 against the partial sum.
OuCheck ou_check(int n_modes, double t, int reference_modes, int n_samples, std::uint64_t seed);

}  // namespace spdemono
