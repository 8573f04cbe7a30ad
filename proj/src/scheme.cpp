#include "spdemono/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spdemono/errors.hpp"

namespace spdemono {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr int kMaxHalvings = 40;

}  // namespace

void SchemeConfig::validate() const {
  if (n_modes < 1) throw ConfigError("SchemeConfig: N must be >= 1");
  if (!(newton_tol > 0.0)) throw ConfigError("SchemeConfig: newton_tol must be positive");
  if (newton_max_iter < 1) throw ConfigError("SchemeConfig: newton_max_iter must be >= 1");
  const double tau = grid.tau();
  const double b = drift.b();
  if (b > 0.0 && !(tau < 1.0 / (4.0 * b))) {
    throw ConfigError("SchemeConfig: tau=" + std::to_string(tau) + " violates tau < 1/(4b) = " +
                      std::to_string(1.0 / (4.0 * b)));
  }
  if (b <= 0.0 && !(tau < 1.0)) throw ConfigError("SchemeConfig: tau must be < 1");
}

ImplicitStepper::ImplicitStepper(SchemeConfig config) : config_(std::move(config)) {
  config_.validate();
  const int N = config_.n_modes;
  projector_ = std::make_shared<const GalerkinProjector>(config_.drift, N);
  const auto n = static_cast<std::size_t>(N);
  const auto J = static_cast<std::size_t>(projector_->points());
  const double tau = config_.grid.tau();
  diag_.resize(n);
  for (int k = 1; k <= N; ++k) diag_[static_cast<std::size_t>(k - 1)] = 1.0 + tau * eigenvalue(k);
  grid_.resize(J);
  fprime_.resize(J);
  scratch_.resize(2 * J);
  for (auto* v : {&coeff_tmp_, &r_, &dz_, &trial_, &r_trial_, &cg_r_, &cg_p_, &cg_ap_, &cg_zv_}) {
    v->resize(n);
  }
}

void ImplicitStepper::evaluate_u(std::span<const double> z, std::span<const double> w) {
  for (std::size_t k = 0; k < z.size(); ++k) coeff_tmp_[k] = z[k] + w[k];
  projector_->transform().synthesize(coeff_tmp_, grid_, scratch_);
}

void ImplicitStepper::residual(std::span<const double> z, std::span<const double> z_m,
                               std::span<const double> w, std::span<double> out) {
  evaluate_u(z, w);
  projector_->project(grid_, out, scratch_);
  const double tau = config_.grid.tau();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = diag_[k] * z[k] - tau * out[k] - z_m[k];
}

void ImplicitStepper::apply_jacobian(std::span<const double> v, std::span<double> out) {
  // grid_ is reused as the product buffer; fprime_ holds the Jacobian weights.
  const SineTransform& t = projector_->transform();
  t.synthesize(v, grid_, scratch_);
  for (std::size_t j = 0; j < grid_.size(); ++j) grid_[j] *= fprime_[j];
  t.analyze(grid_, out, scratch_);
  const double tau = config_.grid.tau();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = diag_[k] * v[k] - tau * out[k];
}

void ImplicitStepper::solve_cg(std::span<const double> rhs, std::span<double> x, double tol) {
  // Jacobi-preconditioned CG; the Jacobian is SPD for admissible tau.
  const std::size_t n = rhs.size();
  std::fill(x.begin(), x.end(), 0.0);
  std::copy(rhs.begin(), rhs.end(), cg_r_.begin());
  for (std::size_t k = 0; k < n; ++k) cg_zv_[k] = cg_r_[k] / diag_[k];
  std::copy(cg_zv_.begin(), cg_zv_.end(), cg_p_.begin());
  double rz = dot(cg_r_, cg_zv_);
  const int max_iter = static_cast<int>(std::max<std::size_t>(2 * n, 50));
  for (int it = 0; it < max_iter && norm2(cg_r_) > tol; ++it) {
    apply_jacobian(cg_p_, cg_ap_);
    const double pap = dot(cg_p_, cg_ap_);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * cg_p_[k];
      cg_r_[k] -= alpha * cg_ap_[k];
    }
    for (std::size_t k = 0; k < n; ++k) cg_zv_[k] = cg_r_[k] / diag_[k];
    const double rz_next = dot(cg_r_, cg_zv_);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) cg_p_[k] = cg_zv_[k] + beta * cg_p_[k];
  }
}

Eigen::MatrixXd ImplicitStepper::jacobian(std::span<const double> z, std::span<const double> w) {
  const int N = config_.n_modes;
  const int J = projector_->points();
  evaluate_u(z, w);
  Eigen::MatrixXd synth(J, N);
  for (int j = 1; j <= J; ++j) {
    const double x = static_cast<double>(j) / (J + 1);
    for (int k = 1; k <= N; ++k) synth(j - 1, k - 1) = std::numbers::sqrt2 * std::sin(k * std::numbers::pi * x);
  }
  Eigen::VectorXd fp(J);
  projector_->derivative_weights(grid_, std::span<double>(fp.data(), static_cast<std::size_t>(J)));
  const double tau = config_.grid.tau();
  Eigen::MatrixXd jac = -(tau / (J + 1)) * (synth.transpose() * fp.asDiagonal() * synth);
  for (int k = 0; k < N; ++k) jac(k, k) += diag_[static_cast<std::size_t>(k)];
  return jac;
}

StepStats ImplicitStepper::solve_newton(std::span<const double> z_m, std::span<const double> w,
                                        std::span<double> z, bool dense) {
  const double tol = config_.newton_tol;
  StepStats stats;
  residual(z, z_m, w, r_);
  double rn = norm2(r_);
  while (rn > tol) {
    if (stats.iterations >= config_.newton_max_iter) {
      throw NonConvergenceError("Newton did not reach tol " + std::to_string(tol) + " in " +
                                    std::to_string(config_.newton_max_iter) +
                                    " iterations (residual " + std::to_string(rn) + ")",
                                rn);
    }
    ++stats.iterations;
    for (double& v : r_) v = -v;
    if (dense) {
      const Eigen::MatrixXd jac = jacobian(z, w);
      const Eigen::Map<const Eigen::VectorXd> rhs(r_.data(), static_cast<Eigen::Index>(r_.size()));
      Eigen::Map<Eigen::VectorXd>(dz_.data(), static_cast<Eigen::Index>(dz_.size())) =
          jac.partialPivLu().solve(rhs);
    } else {
      evaluate_u(z, w);
      projector_->derivative_weights(grid_, fprime_);
      solve_cg(r_, dz_, std::max(0.1 * tol, 1e-13 * rn));
    }

    double step = 1.0;
    double rn_trial = 0.0;
    int halvings = 0;
    for (;;) {
      for (std::size_t k = 0; k < z.size(); ++k) trial_[k] = z[k] + step * dz_[k];
      residual(trial_, z_m, w, r_trial_);
      rn_trial = norm2(r_trial_);
      if (rn_trial < rn) break;
      if (++halvings > kMaxHalvings) {
        throw NonConvergenceError("Newton line search stalled at residual " + std::to_string(rn),
                                  rn);
      }
      step *= 0.5;
    }
    stats.max_quadratic_ratio = std::max(stats.max_quadratic_ratio, rn_trial / (rn * rn));
    std::copy(trial_.begin(), trial_.end(), z.begin());
    std::swap(r_, r_trial_);
    rn = rn_trial;
  }
  stats.residual = rn;
  return stats;
}

StepStats ImplicitStepper::solve_picard(std::span<const double> z_m, std::span<const double> w,
                                        std::span<double> z) {
  const double tau = config_.grid.tau();
  StepStats stats;
  residual(z, z_m, w, r_);
  double rn = norm2(r_);
  while (rn > config_.newton_tol) {
    if (stats.iterations >= config_.newton_max_iter) {
      throw NonConvergenceError("Picard iteration did not converge (residual " +
                                    std::to_string(rn) + ")",
                                rn);
    }
    ++stats.iterations;
    evaluate_u(z, w);
    projector_->project(grid_, dz_, scratch_);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = (z_m[k] + tau * dz_[k]) / diag_[k];
    residual(z, z_m, w, r_);
    rn = norm2(r_);
  }
  stats.residual = rn;
  return stats;
}

StepStats ImplicitStepper::step(std::span<const double> z_m, std::span<const double> w_next,
                                std::span<double> z_next) {
  const auto n = static_cast<std::size_t>(config_.n_modes);
  if (z_m.size() != n || w_next.size() != n || z_next.size() != n) {
    throw DomainError("implicit_step: fields must have N=" + std::to_string(n) + " modes");
  }
  std::copy(z_m.begin(), z_m.end(), z_next.begin());
  switch (config_.solver) {
    case NonlinearSolver::kNewton:
      return solve_newton(z_m, w_next, z_next, false);
    case NonlinearSolver::kNewtonDense:
      return solve_newton(z_m, w_next, z_next, true);
    case NonlinearSolver::kPicard:
      return solve_picard(z_m, w_next, z_next);
  }
  return {};
}

SpectralField implicit_step(const SpectralField& z_m, const SpectralField& w_next,
                            const SchemeConfig& config, StepStats* stats) {
  ImplicitStepper stepper(config);
  std::vector<double> out(static_cast<std::size_t>(config.n_modes));
  const StepStats s = stepper.step(z_m.coeffs(), w_next.coeffs(), out);
  if (stats) *stats = s;
  return SpectralField(std::move(out));
}

SpectralField step_residual(const SpectralField& z_next, const SpectralField& z_m,
                            const SpectralField& w_next, const SchemeConfig& config) {
  ImplicitStepper stepper(config);
  std::vector<double> out(static_cast<std::size_t>(config.n_modes));
  stepper.residual(z_next.coeffs(), z_m.coeffs(), w_next.coeffs(), out);
  return SpectralField(std::move(out));
}

Eigen::MatrixXd newton_jacobian(const SpectralField& z, const SpectralField& w,
                                const SchemeConfig& config) {
  ImplicitStepper stepper(config);
  return stepper.jacobian(z.coeffs(), w.coeffs());
}

Trajectory run_path(const SchemeConfig& config, const SpectralField& u0, const OuPathSet& ou,
                    int sample_index) {
  ImplicitStepper stepper(config);
  return run_path(stepper, u0, ou, sample_index);
}

Trajectory run_path(ImplicitStepper& stepper, const SpectralField& u0, const OuPathSet& ou,
                    int sample_index) {
  const SchemeConfig& config = stepper.config();
  if (!(ou.grid() == config.grid)) {
    throw IncompatibleGridError("run_path: noise grid differs from the scheme grid");
  }
  if (ou.n_modes() < config.n_modes) {
    throw IncompatibleGridError("run_path: noise has fewer modes than the scheme");
  }
  if (sample_index < 0 || sample_index >= ou.n_samples()) {
    throw DomainError("run_path: sample index out of range");
  }
  const int N = config.n_modes;
  const int M = config.grid.steps();
  auto noise = [&](int m) { return ou.at(sample_index, m).first(static_cast<std::size_t>(N)); };
  auto add = [](std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return SpectralField(std::move(out));
  };

  Trajectory tr{config, {}, {}};
  tr.z.reserve(static_cast<std::size_t>(M + 1));
  tr.u.reserve(static_cast<std::size_t>(M + 1));
  tr.z.push_back(project(u0, N));
  tr.u.push_back(add(tr.z.back().coeffs(), noise(0)));
  std::vector<double> next(static_cast<std::size_t>(N));
  for (int m = 0; m < M; ++m) {
    try {
      stepper.step(tr.z.back().coeffs(), noise(m + 1), next);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("step m=" + std::to_string(m) + ", sample " +
                                    std::to_string(ou.first_sample() + static_cast<std::uint64_t>(sample_index)) +
                                    ": " + e.what(),
                                e.last_residual);
    }
    tr.z.emplace_back(next);
    tr.u.push_back(add(next, noise(m + 1)));
  }
  return tr;
}

}  // namespace spdemono
