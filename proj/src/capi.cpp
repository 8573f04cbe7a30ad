#include "spdemono/spdemono.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "spdemono/errors.hpp"
#include "spdemono/harness.hpp"

struct spm_drift {
  spdemono::DriftSpec spec;
};

struct spm_experiment {
  spdemono::ExperimentConfig config;
};

struct spm_report {
  spdemono::RateReport report;
};

namespace {

thread_local std::string g_last_error;

spm_status fail(spm_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
spm_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SPM_OK;
  } catch (const spdemono::Error& e) {
    return fail(static_cast<spm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPM_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPM_ERR_INTERNAL, "unknown error");
  }
}

#define SPM_REQUIRE(cond)                                                   \
  do {                                                                      \
    if (!(cond)) return fail(SPM_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

void copy_point(const spdemono::RatePoint& p, spm_rate_point* out) {
  std::memset(out->sweep_param, 0, sizeof out->sweep_param);
  std::strncpy(out->sweep_param, p.sweep_param.c_str(), sizeof out->sweep_param - 1);
  out->value = p.value;
  out->n_samples = p.n_samples;
  out->seed = p.seed;
  out->err1 = p.err1;
  out->err1_se = p.err1_se;
  out->err2 = p.err2;
  out->err2_se = p.err2_se;
}

void copy_fit(const spdemono::RateFit& f, spm_rate_fit* out) {
  out->slope = f.slope;
  out->intercept = f.intercept;
  out->r_squared = f.r_squared;
}

}  // namespace

extern "C" {

const char* spm_last_error(void) { return g_last_error.c_str(); }

const char* spm_version(void) { return "0.1.0"; }

// ---- spectral core ----------------------------------------------------------

spm_status spm_synthesize(const double* coeffs, size_t n_modes, size_t j_points, double* values) {
  SPM_REQUIRE(coeffs && values);
  return guarded([&] {
    const spdemono::SpectralField f(std::vector<double>(coeffs, coeffs + n_modes));
    const auto g = spdemono::synthesize(f, static_cast<int>(j_points));
    std::memcpy(values, g.values().data(), j_points * sizeof(double));
  });
}

spm_status spm_analyze(const double* values, size_t j_points, size_t n_modes, double* coeffs) {
  SPM_REQUIRE(values && coeffs);
  return guarded([&] {
    const spdemono::GridField g(std::vector<double>(values, values + j_points));
    const auto f = spdemono::analyze(g, static_cast<int>(n_modes));
    std::memcpy(coeffs, f.coeffs().data(), n_modes * sizeof(double));
  });
}

spm_status spm_dealias_points(int n_modes, int degree, int* out) {
  SPM_REQUIRE(out);
  return guarded([&] { *out = spdemono::dealias_points(n_modes, degree); });
}

// ---- drift ------------------------------------------------------------------

spm_status spm_drift_builtin(const char* name, spm_drift** out) {
  SPM_REQUIRE(name && out);
  *out = nullptr;
  return guarded([&] { *out = new spm_drift{spdemono::builtin(name)}; });
}

spm_status spm_drift_polynomial(const double* coeffs, size_t n, double b, double L_f, double q,
                                double Lf_tilde, spm_drift** out) {
  SPM_REQUIRE(out && (coeffs || n == 0));
  *out = nullptr;
  return guarded([&] {
    *out = new spm_drift{spdemono::DriftSpec::polynomial(std::vector<double>(coeffs, coeffs + n),
                                                         {b, L_f, q, Lf_tilde})};
  });
}

void spm_drift_free(spm_drift* drift) { delete drift; }

spm_status spm_drift_constants(const spm_drift* drift, double* b, double* L_f, double* q,
                               double* Lf_tilde) {
  SPM_REQUIRE(drift);
  const auto& c = drift->spec.constants();
  if (b) *b = c.b;
  if (L_f) *L_f = c.L_f;
  if (q) *q = c.q;
  if (Lf_tilde) *Lf_tilde = c.Lf_tilde;
  return SPM_OK;
}

spm_status spm_drift_eval(const spm_drift* drift, double x, double* f, double* f_prime) {
  SPM_REQUIRE(drift);
  return guarded([&] {
    if (f) *f = drift->spec.f(x);
    if (f_prime) *f_prime = drift->spec.f_prime(x);
  });
}

spm_status spm_check_monotone(const spm_drift* drift, uint64_t n_pairs, double lo, double hi,
                              uint64_t seed, spm_monotone_report* out) {
  SPM_REQUIRE(drift && out);
  return guarded([&] {
    const auto r = spdemono::check_monotone(drift->spec, n_pairs, lo, hi, seed);
    *out = {r.holds ? 1 : 0,      r.worst_margin,           r.witness_x,           r.witness_y,
            r.derivative_holds ? 1 : 0, r.worst_derivative_margin, r.derivative_witness};
  });
}

// ---- noise ------------------------------------------------------------------

spm_status spm_ou_marginal_variance(int k, double t, double* out) {
  SPM_REQUIRE(out);
  return guarded([&] { *out = spdemono::ou_marginal_variance(k, t); });
}

spm_status spm_ou_truncation_error(int n_modes, double t, int k_max, double* out) {
  SPM_REQUIRE(out);
  return guarded([&] { *out = spdemono::truncation_error_analytic(n_modes, t, k_max); });
}

spm_status spm_ou_check(int n_modes, double t, int reference_modes, int n_samples, uint64_t seed,
                        spm_ou_check_result* out) {
  SPM_REQUIRE(out);
  return guarded([&] {
    const auto r = spdemono::ou_check(n_modes, t, reference_modes, n_samples, seed);
    *out = {r.mc_mean,     r.mc_se,        r.analytic, r.upper_bound,
            r.lower_bound, r.within_3se ? 1 : 0, r.bounds_hold ? 1 : 0};
  });
}

// ---- scheme -----------------------------------------------------------------

spm_status spm_implicit_step(const spm_drift* drift, int n_modes, double tau, const double* z_m,
                             const double* w_next, double* z_next) {
  SPM_REQUIRE(drift && z_m && w_next && z_next && n_modes > 0);
  return guarded([&] {
    const auto n = static_cast<std::size_t>(n_modes);
    spdemono::SchemeConfig cfg(n_modes, spdemono::TimeGrid(tau, 1), drift->spec);
    const auto z = spdemono::implicit_step(spdemono::SpectralField({z_m, z_m + n}),
                                           spdemono::SpectralField({w_next, w_next + n}), cfg);
    std::memcpy(z_next, z.coeffs().data(), n * sizeof(double));
  });
}

spm_status spm_run_path(const spm_drift* drift, int n_modes, double final_time, int steps,
                        const double* u0, size_t u0_len, uint64_t seed, uint64_t sample_index,
                        double* u_out) {
  SPM_REQUIRE(drift && u0 && u0_len > 0 && u_out && n_modes > 0);
  return guarded([&] {
    const spdemono::TimeGrid grid(final_time, steps);
    spdemono::SchemeConfig cfg(n_modes, grid, drift->spec);
    const auto ou = spdemono::simulate(n_modes, grid, 1, seed, sample_index);
    const auto tr = spdemono::run_path(cfg, spdemono::SpectralField({u0, u0 + u0_len}), ou, 0);
    const auto n = static_cast<std::size_t>(n_modes);
    for (std::size_t m = 0; m < tr.u.size(); ++m) {
      std::memcpy(u_out + m * n, tr.u[m].coeffs().data(), n * sizeof(double));
    }
  });
}

// ---- experiments ------------------------------------------------------------

spm_status spm_experiment_preset(const char* name, spm_experiment** out) {
  SPM_REQUIRE(name && out);
  *out = nullptr;
  return guarded([&] { *out = new spm_experiment{spdemono::ExperimentConfig::preset(name)}; });
}

spm_status spm_experiment_from_file(const char* path, spm_experiment** out) {
  SPM_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new spm_experiment{spdemono::ExperimentConfig::from_file(path)}; });
}

spm_status spm_experiment_from_json(const char* text, spm_experiment** out) {
  SPM_REQUIRE(text && out);
  *out = nullptr;
  return guarded([&] { *out = new spm_experiment{spdemono::ExperimentConfig::from_json(text)}; });
}

void spm_experiment_free(spm_experiment* exp) { delete exp; }

spm_status spm_experiment_set_seed(spm_experiment* exp, uint64_t seed) {
  SPM_REQUIRE(exp);
  exp->config.seed = seed;
  return SPM_OK;
}

spm_status spm_experiment_set_samples(spm_experiment* exp, int n_samples) {
  SPM_REQUIRE(exp);
  if (n_samples < 2) return fail(SPM_ERR_CONFIG, "n_samples must be >= 2");
  exp->config.n_samples = n_samples;
  return SPM_OK;
}

spm_status spm_experiment_set_output(spm_experiment* exp, const char* dir) {
  SPM_REQUIRE(exp && dir);
  exp->config.output = dir;
  return SPM_OK;
}

const char* spm_experiment_output(const spm_experiment* exp) {
  return exp ? exp->config.output.c_str() : nullptr;
}

int spm_experiment_is_temporal(const spm_experiment* exp) {
  return exp && exp->config.sweep.kind == spdemono::SweepKind::kTau ? 1 : 0;
}

spm_status spm_experiment_to_json(const spm_experiment* exp, char* buf, size_t cap, size_t* needed) {
  SPM_REQUIRE(exp);
  return guarded([&] {
    const std::string s = exp->config.to_json();
    if (needed) *needed = s.size() + 1;
    if (buf && cap >= s.size() + 1) std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

spm_status spm_experiment_run(const spm_experiment* exp, spm_report** out) {
  SPM_REQUIRE(exp && out);
  *out = nullptr;
  return guarded([&] { *out = new spm_report{spdemono::run_study(exp->config)}; });
}

spm_status spm_report_read_csv(const char* path, spm_report** out) {
  SPM_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] {
    spdemono::RateReport r;
    r.points = spdemono::read_rate_csv(path);
    if (r.points.empty()) throw spdemono::IoError(std::string("'") + path + "' has no rows");
    r.seed = r.points.front().seed;
    r.n_samples = r.points.front().n_samples;
    spdemono::fit_report(r);
    *out = new spm_report{std::move(r)};
  });
}

spm_status spm_report_write_csv(const spm_report* report, const char* path) {
  SPM_REQUIRE(report && path);
  return guarded([&] { spdemono::write_rate_csv(report->report, path); });
}

size_t spm_report_size(const spm_report* report) {
  return report ? report->report.points.size() : 0;
}

spm_status spm_report_point(const spm_report* report, size_t i, spm_rate_point* out) {
  SPM_REQUIRE(report && out);
  if (i >= report->report.points.size()) return fail(SPM_ERR_INVALID_ARGUMENT, "index out of range");
  copy_point(report->report.points[i], out);
  return SPM_OK;
}

spm_status spm_report_fit(const spm_report* report, int column, spm_rate_fit* out) {
  SPM_REQUIRE(report && out && (column == 1 || column == 2));
  const auto& fit = column == 1 ? report->report.fit_err1 : report->report.fit_err2;
  if (!fit) return fail(SPM_ERR_DOMAIN, "rate fit needs at least 3 sweep points");
  copy_fit(*fit, out);
  return SPM_OK;
}

void spm_report_free(spm_report* report) { delete report; }

spm_status spm_fit_rate(const double* h, const double* err, size_t n, spm_rate_fit* out) {
  SPM_REQUIRE(h && err && out);
  return guarded([&] {
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < n; ++i) pts.emplace_back(h[i], err[i]);
    copy_fit(spdemono::fit_rate(pts), out);
  });
}

}  // extern "C"
