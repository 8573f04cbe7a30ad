#include "spdemono/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "spdemono/errors.hpp"
#include "spdemono/parallel.hpp"

namespace spdemono {

namespace {

using nlohmann::json;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

std::string solver_name(NonlinearSolver s) {
  switch (s) {
    case NonlinearSolver::kNewton: return "newton";
    case NonlinearSolver::kNewtonDense: return "newton-dense";
    case NonlinearSolver::kPicard: return "picard";
  }
  return "newton";
}

NonlinearSolver parse_solver(const std::string& s) {
  if (s == "newton") return NonlinearSolver::kNewton;
  if (s == "newton-dense") return NonlinearSolver::kNewtonDense;
  if (s == "picard") return NonlinearSolver::kPicard;
  throw ConfigError("unknown solver method '" + s + "'");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

DriftSpec ExperimentConfig::drift() const {
  if (drift_override) return *drift_override;
  return builtin(drift_name);
}

SpectralField ExperimentConfig::initial_datum() const {
  const int N = reference_modes;
  if (u0_kind == "zero") return SpectralField::zeros(N);
  if (u0_kind == "inverse_square") {
    std::vector<double> c(static_cast<std::size_t>(N));
    for (int k = 1; k <= N; ++k) c[static_cast<std::size_t>(k - 1)] = 1.0 / (static_cast<double>(k) * k);
    return SpectralField(std::move(c));
  }
  if (u0_kind == "coefficients") return project(SpectralField(u0_coefficients), N);
  throw ConfigError("unknown u0 kind '" + u0_kind + "'");
}

SchemeConfig ExperimentConfig::reference_scheme() const {
  SchemeConfig s(reference_modes, TimeGrid(final_time, reference_steps), drift());
  s.newton_tol = newton_tol;
  s.newton_max_iter = newton_max_iter;
  s.solver = solver;
  return s;
}

SchemeConfig ExperimentConfig::coarse_scheme(int sweep_value) const {
  SchemeConfig s = reference_scheme();
  if (sweep.kind == SweepKind::kTau) {
    s.grid = TimeGrid(final_time, sweep_value);
  } else {
    s.n_modes = sweep_value;
  }
  return s;
}

void ExperimentConfig::validate() const {
  if (!(final_time > 0.0)) throw ConfigError("T must be positive");
  if (reference_modes < 1 || reference_steps < 1) throw ConfigError("reference N, M must be >= 1");
  if (n_samples < 2) throw ConfigError("n_samples must be >= 2");
  if (!(q >= 2.0)) throw ConfigError("q must be >= 2");
  if (sweep.values.empty()) throw ConfigError("sweep must list at least one value");
  for (int v : sweep.values) {
    if (v < 1) throw ConfigError("sweep values must be positive");
    if (sweep.kind == SweepKind::kTau && reference_steps % v != 0) {
      throw ConfigError("reference M=" + std::to_string(reference_steps) +
                        " is not divisible by coarse M=" + std::to_string(v));
    }
    if (sweep.kind == SweepKind::kModes && v > reference_modes) {
      throw ConfigError("coarse N=" + std::to_string(v) + " exceeds reference N");
    }
  }
  try {
    (void)initial_datum();
    reference_scheme().validate();
    for (int v : sweep.values) coarse_scheme(v).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"drift", "T", "u0", "reference", "sweep", "n_samples", "seed", "q", "output",
                  "solver"},
                 "config");
  ExperimentConfig c;
  try {
    if (j.contains("drift")) {
      const json& d = j["drift"];
      if (d.is_string()) {
        c.drift_name = d.get<std::string>();
        (void)builtin(c.drift_name);
      } else if (d.is_object()) {
        reject_unknown(d, {"name", "coefficients", "b", "L_f", "q", "Lf_tilde"}, "drift");
        DriftConstants k;
        k.b = d.at("b").get<double>();
        k.L_f = d.at("L_f").get<double>();
        k.q = d.at("q").get<double>();
        k.Lf_tilde = d.at("Lf_tilde").get<double>();
        c.drift_name = d.value("name", std::string("polynomial"));
        c.drift_override = DriftSpec::polynomial(d.at("coefficients").get<std::vector<double>>(),
                                                 k, c.drift_name);
      } else {
        throw ConfigError("drift must be a built-in name or a polynomial object");
      }
    }
    if (j.contains("T")) c.final_time = j["T"].get<double>();
    if (j.contains("u0")) {
      const json& u = j["u0"];
      if (u.is_string()) {
        c.u0_kind = u.get<std::string>();
        if (c.u0_kind != "zero" && c.u0_kind != "inverse_square") {
          throw ConfigError("unknown u0 '" + c.u0_kind + "'");
        }
      } else if (u.is_array()) {
        c.u0_kind = "coefficients";
        c.u0_coefficients = u.get<std::vector<double>>();
      } else {
        throw ConfigError("u0 must be a name or a coefficient array");
      }
    }
    if (j.contains("reference")) {
      const json& r = j["reference"];
      reject_unknown(r, {"N", "M"}, "reference");
      if (r.contains("N")) c.reference_modes = r["N"].get<int>();
      if (r.contains("M")) c.reference_steps = r["M"].get<int>();
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      reject_unknown(s, {"param", "values"}, "sweep");
      const auto param = s.at("param").get<std::string>();
      c.sweep.values.clear();
      if (param == "tau") {
        c.sweep.kind = SweepKind::kTau;
        for (double tau : s.at("values").get<std::vector<double>>()) {
          if (!(tau > 0.0)) throw ConfigError("sweep tau values must be positive");
          const double steps = c.final_time / tau;
          const double rounded = std::round(steps);
          if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
            throw ConfigError("sweep tau does not divide T");
          }
          c.sweep.values.push_back(static_cast<int>(rounded));
        }
      } else if (param == "N") {
        c.sweep.kind = SweepKind::kModes;
        c.sweep.values = s.at("values").get<std::vector<int>>();
      } else {
        throw ConfigError("sweep param must be 'tau' or 'N'");
      }
    }
    if (j.contains("n_samples")) c.n_samples = j["n_samples"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("q")) c.q = j["q"].get<double>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("solver")) {
      const json& s = j["solver"];
      reject_unknown(s, {"method", "newton_tol", "newton_max_iter"}, "solver");
      if (s.contains("method")) c.solver = parse_solver(s["method"].get<std::string>());
      if (s.contains("newton_tol")) c.newton_tol = s["newton_tol"].get<double>();
      if (s.contains("newton_max_iter")) c.newton_max_iter = s["newton_max_iter"].get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type or is missing: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "paper") {
    c.reference_modes = 512;
    c.reference_steps = 8192;
    c.n_samples = 200;
  } else if (name == "desk") {
    // Defaults are the desk temporal study.
  } else if (name == "desk-spatial") {
    c.reference_modes = 256;
    c.reference_steps = 2048;
    c.sweep = {SweepKind::kModes, {8, 16, 32, 64}};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  if (drift_override) {
    const auto& d = *drift_override;
    j["drift"] = {{"name", d.name()},          {"coefficients", d.coefficients()},
                  {"b", d.b()},                {"L_f", d.L_f()},
                  {"q", d.q()},                {"Lf_tilde", d.Lf_tilde()}};
  } else {
    j["drift"] = drift_name;
  }
  j["T"] = final_time;
  if (u0_kind == "coefficients") {
    j["u0"] = u0_coefficients;
  } else {
    j["u0"] = u0_kind;
  }
  j["reference"] = {{"N", reference_modes}, {"M", reference_steps}};
  if (sweep.kind == SweepKind::kTau) {
    std::vector<double> taus;
    for (int m : sweep.values) taus.push_back(final_time / m);
    j["sweep"] = {{"param", "tau"}, {"values", taus}};
  } else {
    j["sweep"] = {{"param", "N"}, {"values", sweep.values}};
  }
  j["n_samples"] = n_samples;
  j["seed"] = seed;
  j["q"] = q;
  j["output"] = output;
  j["solver"] = {{"method", solver_name(solver)},
                 {"newton_tol", newton_tol},
                 {"newton_max_iter", newton_max_iter}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Strong error

std::vector<ErrorSample> strong_error(const ExperimentConfig& cfg, const SchemeConfig& coarse) {
  auto all = strong_error(cfg, std::vector<SchemeConfig>{coarse});
  return std::move(all.front());
}

std::vector<std::vector<ErrorSample>> strong_error(const ExperimentConfig& cfg,
                                                   const std::vector<SchemeConfig>& coarse) {
  cfg.validate();
  const SchemeConfig reference = cfg.reference_scheme();
  const TimeGrid& fine = reference.grid;
  for (const auto& c : coarse) {
    c.validate();
    if (c.grid.final_time() != fine.final_time() || fine.steps() % c.grid.steps() != 0) {
      throw IncompatibleGridError("coarse grid is not nested in the reference grid");
    }
    if (c.n_modes > reference.n_modes) {
      throw IncompatibleGridError("coarse N exceeds the reference N");
    }
  }
  const SpectralField u0 = cfg.initial_datum();
  const int lq_points = dealias_points(reference.n_modes, static_cast<int>(std::ceil(cfg.q)));
  const auto lq_transform = sine_transform(lq_points);

  const auto n = static_cast<std::size_t>(cfg.n_samples);
  std::vector<std::vector<ErrorSample>> out(coarse.size(), std::vector<ErrorSample>(n));
  parallel_for(n, [&](std::size_t s) {
    const OuPathSet ou = simulate(reference.n_modes, fine, 1, cfg.seed, s);
    ImplicitStepper ref_stepper(reference);
    const Trajectory ref = run_path(ref_stepper, u0, ou, 0);

    std::vector<double> diff(static_cast<std::size_t>(reference.n_modes));
    std::vector<double> grid(static_cast<std::size_t>(lq_points));
    std::vector<double> scratch(2 * grid.size());
    for (std::size_t c = 0; c < coarse.size(); ++c) {
      const SchemeConfig& cc = coarse[c];
      const OuPathSet ou_c = restrict(ou, cc.grid, cc.n_modes);
      ImplicitStepper stepper(cc);
      const Trajectory tr = run_path(stepper, u0, ou_c, 0);
      const int stride = fine.steps() / cc.grid.steps();
      ErrorSample e;
      e.sample_index = s;
      e.sq_l2.resize(static_cast<std::size_t>(cc.grid.steps() + 1));
      e.lq_pow.resize(e.sq_l2.size());
      for (int m = 0; m <= cc.grid.steps(); ++m) {
        const auto ur = ref.u[static_cast<std::size_t>(m * stride)].coeffs();
        const auto uc = tr.u[static_cast<std::size_t>(m)].coeffs();
        double sq = 0.0;
        for (std::size_t k = 0; k < diff.size(); ++k) {
          diff[k] = ur[k] - (k < uc.size() ? uc[k] : 0.0);
          sq += diff[k] * diff[k];
        }
        lq_transform->synthesize(diff, grid, scratch);
        double lq = 0.0;
        for (double v : grid) lq += std::pow(std::abs(v), cfg.q);
        e.sq_l2[static_cast<std::size_t>(m)] = sq;
        e.lq_pow[static_cast<std::size_t>(m)] = lq / (lq_points + 1);
      }
      out[c][s] = std::move(e);
    }
  });
  return out;
}

MixedNorms mixed_norms(const std::vector<ErrorSample>& samples, double tau, double q) {
  if (samples.empty()) throw DomainError("mixed_norms: no samples");
  const std::size_t nodes = samples.front().sq_l2.size();
  for (const auto& s : samples) {
    if (s.sq_l2.size() != nodes || s.lq_pow.size() != nodes) {
      throw DomainError("mixed_norms: samples have different node counts");
    }
  }
  MixedNorms r;
  const auto ns = static_cast<double>(samples.size());
  for (std::size_t m = 0; m < nodes; ++m) {
    double acc = 0.0;
    for (const auto& s : samples) acc += s.sq_l2[m];
    const double mean = acc / ns;
    if (m == 0 || mean > r.E1) {
      r.E1 = mean;
      r.sup_node = static_cast<int>(m);
    }
  }
  std::vector<double> at_sup, per_sample;
  for (const auto& s : samples) {
    at_sup.push_back(s.sq_l2[static_cast<std::size_t>(r.sup_node)]);
    double acc = 0.0;
    for (double v : s.lq_pow) acc += v;
    per_sample.push_back(tau * acc);
  }
  r.E1_se = standard_error(at_sup, r.E1);
  r.E2 = mean_of(per_sample);
  r.E2_se = standard_error(per_sample, r.E2);
  r.err1 = std::sqrt(r.E1);
  r.err2 = std::pow(r.E2, 1.0 / q);
  // Delta method.
  r.err1_se = r.err1 > 0.0 ? r.E1_se / (2.0 * r.err1) : 0.0;
  r.err2_se = r.E2 > 0.0 ? r.E2_se * std::pow(r.E2, 1.0 / q - 1.0) / q : 0.0;
  return r;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("fit_rate: need at least 3 points");
  std::vector<double> x, y;
  for (const auto& [h, err] : points) {
    if (!(h > 0.0) || !(err > 0.0)) throw DomainError("fit_rate: values must be positive");
    x.push_back(std::log2(h));
    y.push_back(std::log2(err));
  }
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_rate: all mesh sizes are equal");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

void fit_report(RateReport& report) {
  report.fit_err1.reset();
  report.fit_err2.reset();
  if (report.points.size() < 3) return;
  std::vector<std::pair<double, double>> e1, e2;
  for (const auto& p : report.points) {
    e1.emplace_back(p.mesh(), p.err1);
    e2.emplace_back(p.mesh(), p.err2);
  }
  report.fit_err1 = fit_rate(e1);
  report.fit_err2 = fit_rate(e2);
}

namespace {

RateReport study(const ExperimentConfig& cfg) {
  RateReport report;
  report.started_at = now_iso8601();
  report.seed = cfg.seed;
  report.n_samples = cfg.n_samples;
  std::vector<SchemeConfig> coarse;
  for (int v : cfg.sweep.values) coarse.push_back(cfg.coarse_scheme(v));
  const auto errors = strong_error(cfg, coarse);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const MixedNorms mn = mixed_norms(errors[i], coarse[i].grid.tau(), cfg.q);
    RatePoint p;
    if (cfg.sweep.kind == SweepKind::kTau) {
      p.sweep_param = "tau";
      p.value = coarse[i].grid.tau();
    } else {
      p.sweep_param = "N";
      p.value = coarse[i].n_modes;
    }
    p.n_samples = cfg.n_samples;
    p.seed = cfg.seed;
    p.err1 = mn.err1;
    p.err1_se = mn.err1_se;
    p.err2 = mn.err2;
    p.err2_se = mn.err2_se;
    report.points.push_back(p);
  }
  fit_report(report);
  report.finished_at = now_iso8601();
  return report;
}

}  // namespace

RateReport temporal_study(const ExperimentConfig& cfg) {
  if (cfg.sweep.kind != SweepKind::kTau) throw ConfigError("temporal_study needs a tau sweep");
  return study(cfg);
}

RateReport spatial_study(const ExperimentConfig& cfg) {
  if (cfg.sweep.kind != SweepKind::kModes) throw ConfigError("spatial_study needs an N sweep");
  return study(cfg);
}

RateReport run_study(const ExperimentConfig& cfg) {
  return cfg.sweep.kind == SweepKind::kTau ? temporal_study(cfg) : spatial_study(cfg);
}

// ---------------------------------------------------------------------------
// CSV

void write_rate_csv(const RateReport& report, const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write '" + path + "'");
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "sweep_param,value,n_samples,seed,err1,err1_se,err2,err2_se\n";
  for (const auto& pt : report.points) {
    os << pt.sweep_param << ',' << pt.value << ',' << pt.n_samples << ',' << pt.seed << ','
       << pt.err1 << ',' << pt.err1_se << ',' << pt.err2 << ',' << pt.err2_se << '\n';
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

std::vector<RatePoint> read_rate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "sweep_param,value,n_samples,seed,err1,err1_se,err2,err2_se") {
    throw IoError("'" + path + "' does not have the rate CSV header");
  }
  std::vector<RatePoint> points;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 8 columns");
    }
    try {
      RatePoint p;
      p.sweep_param = cells[0];
      p.value = std::stod(cells[1]);
      p.n_samples = std::stoi(cells[2]);
      p.seed = std::stoull(cells[3]);
      p.err1 = std::stod(cells[4]);
      p.err1_se = std::stod(cells[5]);
      p.err2 = std::stod(cells[6]);
      p.err2_se = std::stod(cells[7]);
      points.push_back(p);
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return points;
}

// ---------------------------------------------------------------------------
// Regularity

HolderEstimate holder_estimate(const HolderConfig& cfg, const std::vector<double>& lags) {
  if (lags.empty()) throw DomainError("holder_estimate: no lags");
  const TimeGrid grid(cfg.final_time, cfg.steps);
  SchemeConfig scheme(cfg.n_modes, grid, builtin(cfg.drift_name));
  scheme.validate();
  std::vector<int> lag_steps;
  for (double d : lags) {
    if (!(d > 0.0) || !(d < cfg.final_time)) throw DomainError("holder_estimate: lag outside (0, T)");
    const double steps = d / grid.tau();
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * steps) {
      throw DomainError("holder_estimate: lag is not a multiple of tau");
    }
    lag_steps.push_back(static_cast<int>(rounded));
  }
  const SpectralField u0 = cfg.u0_coefficients.empty()
                               ? SpectralField::zeros(cfg.n_modes)
                               : project(SpectralField(cfg.u0_coefficients), cfg.n_modes);

  const auto n = static_cast<std::size_t>(cfg.n_samples);
  // per sample, per lag: mean over t of the squared increments
  std::vector<std::vector<double>> su(n, std::vector<double>(lag_steps.size()));
  std::vector<std::vector<double>> sg(n, std::vector<double>(lag_steps.size()));
  parallel_for(n, [&](std::size_t s) {
    const OuPathSet ou = cfg.with_noise
                             ? simulate(cfg.n_modes, grid, 1, cfg.seed, s)
                             : OuPathSet(cfg.n_modes, grid, 1, cfg.seed, s,
                                         std::vector<double>(static_cast<std::size_t>(cfg.n_modes) *
                                                                 static_cast<std::size_t>(cfg.steps + 1),
                                                             0.0));
    const Trajectory tr = run_path(scheme, u0, ou, 0);
    for (std::size_t l = 0; l < lag_steps.size(); ++l) {
      const int lag = lag_steps[l];
      double acc_u = 0.0, acc_g = 0.0;
      for (int m = 0; m + lag <= cfg.steps; ++m) {
        const auto a = tr.u[static_cast<std::size_t>(m + lag)].coeffs();
        const auto b = tr.u[static_cast<std::size_t>(m)].coeffs();
        const auto za = tr.z[static_cast<std::size_t>(m + lag)].coeffs();
        const auto zb = tr.z[static_cast<std::size_t>(m)].coeffs();
        for (int k = 1; k <= cfg.n_modes; ++k) {
          const auto i = static_cast<std::size_t>(k - 1);
          const double du = a[i] - b[i];
          const double dz = za[i] - zb[i];
          acc_u += du * du;
          acc_g += eigenvalue(k) * dz * dz;
        }
      }
      const double count = cfg.steps - lag + 1;
      su[s][l] = acc_u / count;
      sg[s][l] = acc_g / count;
    }
  });

  HolderEstimate h;
  std::vector<std::pair<double, double>> pu, pg;
  for (std::size_t l = 0; l < lag_steps.size(); ++l) {
    double mu = 0.0, mg = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      mu += su[s][l];
      mg += sg[s][l];
    }
    mu /= static_cast<double>(n);
    mg /= static_cast<double>(n);
    const double lag = lag_steps[l] * grid.tau();
    h.lags.push_back(lag);
    h.mean_sq_u.push_back(mu);
    h.mean_sq_grad_z.push_back(mg);
    pu.emplace_back(lag, mu);
    pg.emplace_back(lag, mg);
  }
  if (lag_steps.size() >= 3) {
    if (std::all_of(h.mean_sq_u.begin(), h.mean_sq_u.end(), [](double v) { return v > 0.0; })) {
      h.exponent_u = fit_rate(pu).slope;
    }
    if (std::all_of(h.mean_sq_grad_z.begin(), h.mean_sq_grad_z.end(), [](double v) { return v > 0.0; })) {
      h.exponent_grad_z = fit_rate(pg).slope;
    }
  }
  return h;
}

double ou_increment_analytic(int n_modes, double t, double lag) {
  double s = 0.0;
  for (int k = 1; k <= n_modes; ++k) {
    const double v0 = ou_marginal_variance(k, t);
    const double v1 = ou_marginal_variance(k, t + lag);
    s += v1 + v0 - 2.0 * std::exp(-eigenvalue(k) * lag) * v0;
  }
  return s;
}

OuCheck ou_check(int n_modes, double t, int reference_modes, int n_samples, std::uint64_t seed) {
  if (reference_modes <= n_modes) throw DomainError("ou_check: reference N must exceed N");
  if (n_samples < 2) throw DomainError("ou_check: need at least 2 samples");
  const TimeGrid grid(t, 1);
  constexpr int kBatch = 512;
  std::vector<double> tails;
  tails.reserve(static_cast<std::size_t>(n_samples));
  for (int first = 0; first < n_samples; first += kBatch) {
    const int count = std::min(kBatch, n_samples - first);
    const OuPathSet paths = simulate(reference_modes, grid, count, seed, static_cast<std::uint64_t>(first));
    for (int s = 0; s < count; ++s) {
      const auto w = paths.at(s, 1);
      double acc = 0.0;
      for (int k = n_modes + 1; k <= reference_modes; ++k) {
        acc += w[static_cast<std::size_t>(k - 1)] * w[static_cast<std::size_t>(k - 1)];
      }
      tails.push_back(acc);
    }
  }
  OuCheck r;
  r.mc_mean = mean_of(tails);
  r.mc_se = standard_error(tails, r.mc_mean);
  r.analytic = truncation_error_analytic(n_modes, t, reference_modes);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  r.upper_bound = 1.0 / (2.0 * pi2 * n_modes);
  r.lower_bound = t / (2.0 * (1.0 + 2.0 * pi2 * t) * n_modes);
  r.within_3se = std::abs(r.mc_mean - r.analytic) <= 3.0 * r.mc_se;
  r.bounds_hold = r.analytic <= r.upper_bound && r.analytic >= r.lower_bound;
  return r;
}

}  // namespace spdemono
