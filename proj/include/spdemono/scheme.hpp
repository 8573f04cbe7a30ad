#pragma once

// Backward Euler in time, spectral Galerkin in space, applied to the random
// PDE z' = A z + P_N F(z + W_A^N). In coefficients, each step solves
//   (1 + tau lambda_k) z_{m+1,k} - tau [P_N F(z_{m+1} + W(t_{m+1}))]_k = z_{m,k}
// and the SPDE approximation is recovered as u_m = z_m + W(t_m).

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "spdemono/drift.hpp"
#include "spdemono/noise.hpp"
#include "spdemono/spectral.hpp"

namespace spdemono {

enum class NonlinearSolver {
  kNewton,       ///< damped Newton, matrix-free preconditioned CG for the linear solves
  kNewtonDense,  ///< damped Newton, dense Jacobian and LU
  kPicard,       ///< fixed point z <- (I + tau Lambda)^{-1}(z_m + tau P_N F(z + w))
};

struct SchemeConfig {
  SchemeConfig(int n_modes, TimeGrid grid, DriftSpec drift)
      : n_modes(n_modes), grid(grid), drift(std::move(drift)) {}

  int n_modes;
  TimeGrid grid;
  DriftSpec drift;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  NonlinearSolver solver = NonlinearSolver::kNewton;

  /// Throws ConfigError unless tau < 1/(4b) (b > 0) or tau < 1 (b <= 0), and
  /// the solver parameters are positive.
  void validate() const;
};

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
  /// max over iterations of r_{i+1} / r_i^2 (Newton only, diagnostic).
  double max_quadratic_ratio = 0.0;
};

/// Reusable solver state for one configuration. Not thread-safe; use one per
/// worker.
class ImplicitStepper {
 public:
  explicit ImplicitStepper(SchemeConfig config);

  const SchemeConfig& config() const noexcept { return config_; }
  int grid_points() const noexcept { return projector_->points(); }

  /// Solves for z_next given z_m and w_next (all of length N).
  StepStats step(std::span<const double> z_m, std::span<const double> w_next,
                 std::span<double> z_next);

  /// R(z) = (1 + tau lambda) z - tau P_N F(z + w) - z_m.
  void residual(std::span<const double> z, std::span<const double> z_m,
                std::span<const double> w, std::span<double> out);

  /// Dense dR/dz at z: diag(1 + tau lambda_k) - tau S^T diag(f'(u)) S / (J+1).
  Eigen::MatrixXd jacobian(std::span<const double> z, std::span<const double> w);

 private:
  void evaluate_u(std::span<const double> z, std::span<const double> w);
  void apply_jacobian(std::span<const double> v, std::span<double> out);
  void solve_cg(std::span<const double> rhs, std::span<double> x, double tol);
  StepStats solve_newton(std::span<const double> z_m, std::span<const double> w,
                         std::span<double> z, bool dense);
  StepStats solve_picard(std::span<const double> z_m, std::span<const double> w,
                         std::span<double> z);

  SchemeConfig config_;
  std::shared_ptr<const GalerkinProjector> projector_;
  std::vector<double> diag_;       // 1 + tau lambda_k
  std::vector<double> grid_;       // u on the grid
  std::vector<double> fprime_;     // Jacobian weights on the grid
  std::vector<double> scratch_;
  std::vector<double> coeff_tmp_;
  std::vector<double> r_, dz_, trial_, r_trial_;
  std::vector<double> cg_r_, cg_p_, cg_ap_, cg_zv_;
};

SpectralField implicit_step(const SpectralField& z_m, const SpectralField& w_next,
                            const SchemeConfig& config, StepStats* stats = nullptr);

/// Coefficient-space step residual (used to test the variational identity).
SpectralField step_residual(const SpectralField& z_next, const SpectralField& z_m,
                            const SpectralField& w_next, const SchemeConfig& config);

Eigen::MatrixXd newton_jacobian(const SpectralField& z, const SpectralField& w,
                                const SchemeConfig& config);

struct Trajectory {
  SchemeConfig config;
  std::vector<SpectralField> z;  ///< m = 0..M
  std::vector<SpectralField> u;  ///< u_m = z_m + W(t_m)
};

/// z_0 = P_N u0, z_{m+1} = implicit_step(z_m, W(t_{m+1})), u_m = z_m + W(t_m),
/// with W the first N modes of sample `sample_index` of `ou`.
Trajectory run_path(const SchemeConfig& config, const SpectralField& u0, const OuPathSet& ou,
                    int sample_index);
/// Same, reusing a stepper built for `stepper.config()`.
Trajectory run_path(ImplicitStepper& stepper, const SpectralField& u0, const OuPathSet& ou,
                    int sample_index);

}  // namespace spdemono
