// spdemono command-line driver. Talks to the library only through the C API.
//
//   spdemono run [--preset desk|paper|desk-spatial | --config PATH] [--seed U64]
//                [--samples INT] [--out DIR]
//   spdemono ou-check [--modes N] [--t T] [--reference-modes N] [--samples INT] [--seed U64]
//   spdemono rates --csv PATH
//   spdemono certify-drift [--drift NAME] [--pairs INT] [--lo X] [--hi X] [--seed U64]
//
// Exit codes: 0 success, 1 configuration error (also a failed check),
// 2 solver nonconvergence, 3 I/O error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spdemono/spdemono.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitIo = 3;

int exit_code(spm_status s) {
  switch (s) {
    case SPM_OK: return kExitOk;
    case SPM_ERR_NONCONVERGENCE: return kExitNonConvergence;
    case SPM_ERR_IO: return kExitIo;
    default: return kExitConfig;
  }
}

int report_failure(spm_status s, const char* what) {
  std::fprintf(stderr, "spdemono: %s: %s\n", what, spm_last_error());
  return exit_code(s);
}

struct ExperimentDeleter {
  void operator()(spm_experiment* e) const { spm_experiment_free(e); }
};
struct ReportDeleter {
  void operator()(spm_report* r) const { spm_report_free(r); }
};
struct DriftDeleter {
  void operator()(spm_drift* d) const { spm_drift_free(d); }
};
using ExperimentPtr = std::unique_ptr<spm_experiment, ExperimentDeleter>;
using ReportPtr = std::unique_ptr<spm_report, ReportDeleter>;
using DriftPtr = std::unique_ptr<spm_drift, DriftDeleter>;

void print_fits(const spm_report* report, const char* label) {
  for (int column : {1, 2}) {
    spm_rate_fit fit;
    if (spm_report_fit(report, column, &fit) == SPM_OK) {
      std::printf("%s err%d slope %.6f intercept %.6f R^2 %.6f\n", label, column, fit.slope,
                  fit.intercept, fit.r_squared);
    } else {
      std::printf("%s err%d slope n/a (%s)\n", label, column, spm_last_error());
    }
  }
}

void print_points(const spm_report* report) {
  std::printf("%-6s %-14s %-14s %-14s %-14s %-14s\n", "param", "value", "err1", "err1_se", "err2",
              "err2_se");
  for (size_t i = 0; i < spm_report_size(report); ++i) {
    spm_rate_point p;
    spm_report_point(report, i, &p);
    std::printf("%-6s %-14.8g %-14.8g %-14.8g %-14.8g %-14.8g\n", p.sweep_param, p.value, p.err1,
                p.err1_se, p.err2, p.err2_se);
  }
}

struct RunArgs {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  spm_experiment* raw = nullptr;
  spm_status s = SPM_OK;
  if (!a.config.empty()) {
    s = spm_experiment_from_file(a.config.c_str(), &raw);
  } else {
    s = spm_experiment_preset(a.preset.empty() ? "desk" : a.preset.c_str(), &raw);
  }
  if (s != SPM_OK) return report_failure(s, "loading experiment");
  ExperimentPtr exp(raw);
  if (a.seed) spm_experiment_set_seed(exp.get(), *a.seed);
  if (a.samples && (s = spm_experiment_set_samples(exp.get(), *a.samples)) != SPM_OK) {
    return report_failure(s, "--samples");
  }
  if (!a.out.empty()) spm_experiment_set_output(exp.get(), a.out.c_str());

  const std::filesystem::path dir = spm_experiment_output(exp.get());
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "spdemono: cannot create '%s': %s\n", dir.c_str(), ec.message().c_str());
    return kExitIo;
  }

  spm_report* rep = nullptr;
  if ((s = spm_experiment_run(exp.get(), &rep)) != SPM_OK) return report_failure(s, "run");
  ReportPtr report(rep);
  const bool temporal = spm_experiment_is_temporal(exp.get()) != 0;
  const auto csv = dir / (temporal ? "temporal.csv" : "spatial.csv");
  if ((s = spm_report_write_csv(report.get(), csv.c_str())) != SPM_OK) {
    return report_failure(s, "writing CSV");
  }
  size_t needed = 0;
  spm_experiment_to_json(exp.get(), nullptr, 0, &needed);
  std::string json(needed, '\0');
  spm_experiment_to_json(exp.get(), json.data(), json.size(), &needed);
  json.resize(needed - 1);
  const auto cfg_path = dir / "config.json";
  if (std::FILE* f = std::fopen(cfg_path.c_str(), "wb")) {
    std::fputs(json.c_str(), f);
    std::fputc('\n', f);
    std::fclose(f);
  } else {
    std::fprintf(stderr, "spdemono: cannot write '%s'\n", cfg_path.c_str());
    return kExitIo;
  }
  print_points(report.get());
  print_fits(report.get(), temporal ? "tau" : "N");
  std::printf("wrote %s\n", csv.c_str());
  return kExitOk;
}

int cmd_rates(const std::string& csv) {
  spm_report* rep = nullptr;
  const spm_status s = spm_report_read_csv(csv.c_str(), &rep);
  if (s != SPM_OK) return report_failure(s, "reading CSV");
  ReportPtr report(rep);
  print_points(report.get());
  spm_rate_point first;
  spm_report_point(report.get(), 0, &first);
  print_fits(report.get(), first.sweep_param);
  return kExitOk;
}

int cmd_ou_check(int modes, double t, int reference_modes, int samples, std::uint64_t seed) {
  spm_ou_check_result r;
  const spm_status s = spm_ou_check(modes, t, reference_modes, samples, seed, &r);
  if (s != SPM_OK) return report_failure(s, "ou-check");
  std::printf("N=%d t=%g reference N=%d samples=%d\n", modes, t, reference_modes, samples);
  std::printf("monte carlo  %.8e +- %.3e\n", r.mc_mean, r.mc_se);
  std::printf("analytic     %.8e\n", r.analytic);
  std::printf("bounds       [%.8e, %.8e] %s\n", r.lower_bound, r.upper_bound,
              r.bounds_hold ? "hold" : "VIOLATED");
  const bool pass = r.within_3se && r.bounds_hold;
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitConfig;
}

int cmd_certify(const std::string& name, std::uint64_t pairs, double lo, double hi,
                std::uint64_t seed) {
  spm_drift* raw = nullptr;
  spm_status s = spm_drift_builtin(name.c_str(), &raw);
  if (s != SPM_OK) return report_failure(s, "drift");
  DriftPtr drift(raw);
  double b = 0, lf = 0, q = 0, lft = 0;
  spm_drift_constants(drift.get(), &b, &lf, &q, &lft);
  spm_monotone_report r;
  if ((s = spm_check_monotone(drift.get(), pairs, lo, hi, seed, &r)) != SPM_OK) {
    return report_failure(s, "certify-drift");
  }
  std::printf("drift %s: b=%.17g L_f=%.17g q=%.17g Lf_tilde=%.17g\n", name.c_str(), b, lf, q, lft);
  std::printf("pairs %llu on [%g, %g]^2, seed %llu\n", static_cast<unsigned long long>(pairs), lo,
              hi, static_cast<unsigned long long>(seed));
  std::printf("worst monotonicity margin %.6e at (x, y) = (%.17g, %.17g)\n", r.worst_margin,
              r.witness_x, r.witness_y);
  std::printf("worst derivative margin   %.6e at x = %.17g\n", r.worst_derivative_margin,
              r.derivative_witness);
  std::printf("%s\n", r.holds ? "CERTIFIED" : "FAIL");
  return r.holds ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backward Euler / spectral Galerkin SPDE solver and rate harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::uint64_t seed_value = 0;
  int samples_value = 0;
  auto* run = app.add_subcommand("run", "execute an experiment (preset or JSON config)");
  auto* preset_opt = run->add_option("--preset", run_args.preset, "paper, desk or desk-spatial")
                         ->check(CLI::IsMember({"paper", "desk", "desk-spatial"}));
  run->add_option("--config", run_args.config, "experiment JSON file")->excludes(preset_opt);
  auto* run_seed = run->add_option("--seed", seed_value, "base seed");
  auto* run_samples = run->add_option("--samples", samples_value, "number of sample paths");
  run->add_option("--out", run_args.out, "output directory");

  int ou_modes = 16;
  double ou_t = 1.0;
  int ou_ref = 1024;
  int ou_samples = 10000;
  std::uint64_t ou_seed = 1;
  auto* ou = app.add_subcommand("ou-check", "OU truncation error: Monte Carlo vs closed form");
  ou->add_option("--modes", ou_modes, "truncation N")->check(CLI::PositiveNumber);
  ou->add_option("--t", ou_t, "time")->check(CLI::PositiveNumber);
  ou->add_option("--reference-modes", ou_ref, "fine mode count");
  ou->add_option("--samples", ou_samples, "Monte Carlo samples");
  ou->add_option("--seed", ou_seed, "seed");

  std::string rates_csv;
  auto* rates = app.add_subcommand("rates", "fit log-log slopes of an existing rate CSV");
  rates->add_option("--csv,csv", rates_csv, "rate CSV")->required();

  std::string drift_name = "paper_quintic";
  std::uint64_t pairs = 1000000;
  double lo = -10.0, hi = 10.0;
  std::uint64_t cert_seed = 1;
  auto* cert = app.add_subcommand("certify-drift", "sample the monotonicity condition");
  cert->add_option("--drift", drift_name, "built-in drift name");
  cert->add_option("--pairs", pairs, "number of sampled pairs");
  cert->add_option("--lo", lo, "box lower end");
  cert->add_option("--hi", hi, "box upper end");
  cert->add_option("--seed", cert_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    if (*run_seed) run_args.seed = seed_value;
    if (*run_samples) run_args.samples = samples_value;
    return cmd_run(run_args);
  }
  if (ou->parsed()) return cmd_ou_check(ou_modes, ou_t, ou_ref, ou_samples, ou_seed);
  if (rates->parsed()) return cmd_rates(rates_csv);
  if (cert->parsed()) return cmd_certify(drift_name, pairs, lo, hi, cert_seed);
  return kExitConfig;
}
