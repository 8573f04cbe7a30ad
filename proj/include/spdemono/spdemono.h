/*
 * spdemono C API.
 *
 * Backward Euler / spectral Galerkin solver for monotone SPDEs on (0,1) with
 * additive space-time white noise, plus the Monte Carlo rate harness.
 *
 * All functions return an spm_status; on failure a message is available from
 * spm_last_error() on the calling thread. Handles are opaque and owned by the
 * caller, who releases them with the matching *_free function.
 */
#ifndef SPDEMONO_SPDEMONO_H_
#define SPDEMONO_SPDEMONO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SPDEMONO_BUILDING)
#define SPM_API __attribute__((visibility("default")))
#else
#define SPM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spm_status {
  SPM_OK = 0,
  SPM_ERR_CONFIG = 1,
  SPM_ERR_NONCONVERGENCE = 2,
  SPM_ERR_IO = 3,
  SPM_ERR_DOMAIN = 4,
  SPM_ERR_RESOLUTION = 5,
  SPM_ERR_INCOMPATIBLE_GRID = 6,
  SPM_ERR_RESOURCE = 7,
  SPM_ERR_INVALID_ARGUMENT = 8,
  SPM_ERR_INTERNAL = 99
} spm_status;

SPM_API const char* spm_last_error(void);
SPM_API const char* spm_version(void);

/* ---- spectral core -------------------------------------------------- */

/* values[j] = sum_k coeffs[k] sqrt(2) sin(k pi j/(J+1)), j = 1..J. */
SPM_API spm_status spm_synthesize(const double* coeffs, size_t n_modes, size_t j_points,
                                  double* values);
SPM_API spm_status spm_analyze(const double* values, size_t j_points, size_t n_modes,
                               double* coeffs);
SPM_API spm_status spm_dealias_points(int n_modes, int degree, int* out);

/* ---- drift ---------------------------------------------------------- */

typedef struct spm_drift spm_drift;

/* "allen_cahn", "paper_quintic" or "zero". */
SPM_API spm_status spm_drift_builtin(const char* name, spm_drift** out);
/* f(x) = sum_{i<n} coeffs[i] x^i with the dissipativity constants. */
SPM_API spm_status spm_drift_polynomial(const double* coeffs, size_t n, double b, double L_f,
                                        double q, double Lf_tilde, spm_drift** out);
SPM_API void spm_drift_free(spm_drift* drift);
SPM_API spm_status spm_drift_constants(const spm_drift* drift, double* b, double* L_f, double* q,
                                       double* Lf_tilde);
SPM_API spm_status spm_drift_eval(const spm_drift* drift, double x, double* f, double* f_prime);

typedef struct spm_monotone_report {
  int holds;
  double worst_margin;
  double witness_x;
  double witness_y;
  int derivative_holds;
  double worst_derivative_margin;
  double derivative_witness;
} spm_monotone_report;

SPM_API spm_status spm_check_monotone(const spm_drift* drift, uint64_t n_pairs, double lo,
                                      double hi, uint64_t seed, spm_monotone_report* out);

/* ---- noise ---------------------------------------------------------- */

SPM_API spm_status spm_ou_marginal_variance(int k, double t, double* out);
SPM_API spm_status spm_ou_truncation_error(int n_modes, double t, int k_max, double* out);

typedef struct spm_ou_check_result {
  double mc_mean;
  double mc_se;
  double analytic;
  double upper_bound;
  double lower_bound;
  int within_3se;
  int bounds_hold;
} spm_ou_check_result;

SPM_API spm_status spm_ou_check(int n_modes, double t, int reference_modes, int n_samples,
                                uint64_t seed, spm_ou_check_result* out);

/* ---- scheme --------------------------------------------------------- */

/* One backward Euler step of size tau on n_modes coefficients. */
SPM_API spm_status spm_implicit_step(const spm_drift* drift, int n_modes, double tau,
                                     const double* z_m, const double* w_next, double* z_next);

/* Runs sample `sample_index` of the seeded noise and writes u_m for
 * m = 0..steps into u_out, row-major with n_modes columns. u0 may be
 * shorter or longer than n_modes (it is projected). */
SPM_API spm_status spm_run_path(const spm_drift* drift, int n_modes, double final_time, int steps,
                                const double* u0, size_t u0_len, uint64_t seed,
                                uint64_t sample_index, double* u_out);

/* ---- experiments ---------------------------------------------------- */

typedef struct spm_experiment spm_experiment;
typedef struct spm_report spm_report;

/* "paper", "desk" or "desk-spatial". */
SPM_API spm_status spm_experiment_preset(const char* name, spm_experiment** out);
SPM_API spm_status spm_experiment_from_file(const char* path, spm_experiment** out);
SPM_API spm_status spm_experiment_from_json(const char* text, spm_experiment** out);
SPM_API void spm_experiment_free(spm_experiment* exp);
SPM_API spm_status spm_experiment_set_seed(spm_experiment* exp, uint64_t seed);
SPM_API spm_status spm_experiment_set_samples(spm_experiment* exp, int n_samples);
SPM_API spm_status spm_experiment_set_output(spm_experiment* exp, const char* dir);
/* Valid until the next call that modifies exp. */
SPM_API const char* spm_experiment_output(const spm_experiment* exp);
/* 1 for a temporal (tau) sweep, 0 for a spatial (N) sweep. */
SPM_API int spm_experiment_is_temporal(const spm_experiment* exp);
/* Copies the JSON form into buf (NUL-terminated) when cap suffices; *needed
 * receives the required size including the terminator. */
SPM_API spm_status spm_experiment_to_json(const spm_experiment* exp, char* buf, size_t cap,
                                          size_t* needed);

SPM_API spm_status spm_experiment_run(const spm_experiment* exp, spm_report** out);

typedef struct spm_rate_point {
  char sweep_param[8]; /* "tau" or "N" */
  double value;
  int n_samples;
  uint64_t seed;
  double err1, err1_se, err2, err2_se;
} spm_rate_point;

typedef struct spm_rate_fit {
  double slope;
  double intercept;
  double r_squared;
} spm_rate_fit;

SPM_API spm_status spm_report_read_csv(const char* path, spm_report** out);
SPM_API spm_status spm_report_write_csv(const spm_report* report, const char* path);
SPM_API size_t spm_report_size(const spm_report* report);
SPM_API spm_status spm_report_point(const spm_report* report, size_t i, spm_rate_point* out);
/* column 1 = err1, 2 = err2. SPM_ERR_DOMAIN when fewer than 3 points. */
SPM_API spm_status spm_report_fit(const spm_report* report, int column, spm_rate_fit* out);
SPM_API void spm_report_free(spm_report* report);

SPM_API spm_status spm_fit_rate(const double* h, const double* err, size_t n, spm_rate_fit* out);

#ifdef __cplusplus
}
#endif

#endif /* SPDEMONO_SPDEMONO_H_ */
