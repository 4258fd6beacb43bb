// decaylab command-line driver.
//
// Exit status: 0 when every assertion passes, 1 on a failed assertion or a
// numerical failure, 2 on a configuration or usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "decaylab/compare.hpp"
#include "decaylab/config.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/feedback.hpp"
#include "decaylab/harness.hpp"
#include "decaylab/transform.hpp"
#include "decaylab/wave.hpp"

namespace fs = std::filesystem;
using namespace decaylab;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;

struct LawOptions {
  std::string config;
  std::string family = "power";
  double p = 3.0;
  double q = 2.0;
  std::optional<double> r0;

  feedback::FeedbackLaw resolve() const {
    if (!config.empty()) return harness::load_config(config).sim.law;
    return feedback::make_feedback(feedback::parse_family(family), {p, q}, r0);
  }
};

void add_law_options(CLI::App* cmd, LawOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config; its [law] section is used");
  cmd->add_option("--family", o.family,
                  "linear | power | exp_inv_square | power_log | sub_exponential");
  cmd->add_option("--p", o.p, "Family parameter p");
  cmd->add_option("--q", o.q, "Family parameter q (power_log)");
  cmd->add_option("--r0", o.r0, "Saturation radius");
}

std::string fmt(double v) { return harness::format_number(v); }

void emit(const std::string& out_dir, const std::string& name, const std::string& content) {
  std::cout << content;
  if (!out_dir.empty()) harness::write_file_atomic((fs::path(out_dir) / name).string(), content);
}

// ---------------------------------------------------------------------------

struct CalcOptions {
  LawOptions law;
  std::vector<std::string> quantities{"H", "H_prime", "lambda"};
  std::vector<double> at;
  double beta = 1.0;
  double M = 1.0;
  double kappa = 1.0;
  bool limits = false;
  std::string out;
};

double calc_value(const feedback::FeedbackLaw& law, const std::string& q, double x,
                  const CalcOptions& o) {
  transform::DecayEnvelope env;
  env.law = law;
  env.beta = o.beta;
  env.M = o.M;
  env.kappa = o.kappa;
  if (q == "g") return feedback::eval_g(law, x);
  if (q == "H") return feedback::eval_H(law, x);
  if (q == "H_prime") return feedback::eval_H_prime(law, x);
  if (q == "lambda") return feedback::lambda_H(law, x);
  if (q == "H_prime_inverse") return transform::inverse_H_prime(law, x);
  if (q == "conjugate") return transform::conjugate(law, x);
  if (q == "L") return transform::eval_L(law, x);
  if (q == "L_inverse") return transform::inverse_L(law, x);
  if (q == "psi0") return transform::psi0_eval(law, x);
  if (q == "psi0_inverse") return transform::psi0_inverse(law, x);
  if (q == "envelope_general") return transform::envelope_general(env, x);
  if (q == "envelope_simplified") {
    env.kind = transform::EnvelopeKind::simplified;
    return transform::envelope_simplified(env, x);
  }
  throw ConfigError("unknown quantity '" + q + "'");
}

int cmd_calc(const CalcOptions& o) {
  const auto law = o.law.resolve();
  std::string text = "# " + law.describe() + "\n";
  if (o.limits) {
    const auto lim = feedback::lambda_limit(law);
    const auto convex = feedback::convexity_check(law);
    text += "# lambda_liminf\t" + fmt(lim.liminf) + "\n# lambda_limsup\t" + fmt(lim.limsup) +
            "\n# strictly_convex\t" + (convex.strictly_convex ? "true" : "false") + "\n";
  }
  std::vector<double> at = o.at;
  if (at.empty()) {
    for (int i = 1; i <= 10; ++i) at.push_back(law.h_max() * i / 10.0);
  }
  text += "x";
  for (const auto& q : o.quantities) text += "\t" + q;
  text += "\n";
  for (double x : at) {
    text += fmt(x);
    for (const auto& q : o.quantities) text += "\t" + fmt(calc_value(law, q, x, o));
    text += "\n";
  }
  emit(o.out, "calc.tsv", text);
  return kPass;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string config;
  std::string out;
  bool trace_only = false;
};

int cmd_simulate(const SimulateOptions& o) {
  auto cfg = harness::load_config(o.config);
  if (!o.out.empty()) cfg.output.dir = o.out;
  if (o.trace_only) {
    const auto trace = wave::run(cfg.sim);
    harness::write_file_atomic((fs::path(cfg.output.dir) / cfg.output.trace).string(),
                               wave::trace_csv(trace));
    std::cout << "wrote " << trace.samples.size() << " samples, E(T)/E(0) = "
              << fmt(trace.samples.back().E / trace.samples.front().E) << "\n";
    return kPass;
  }
  const auto result = harness::run_experiment(cfg);
  std::cout << result.text();
  return result.passed() ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct FitOptions {
  std::string trace;
  std::string out;
  std::string mode = "power";
  double p = 3.0;
  std::optional<double> lo, hi;
  double t_min_fraction = 2.0 / 3.0;
  double t_max_fraction = 1.0;
  std::optional<double> slope_min, slope_max;
};

int cmd_fit(const FitOptions& o) {
  const auto series = harness::series_from_trace(wave::read_trace_csv(o.trace));
  const auto mode = harness::parse_fit_mode(o.mode);
  auto window = harness::default_window(series, mode, o.t_min_fraction, o.t_max_fraction);
  if (o.lo) window.lo = *o.lo;
  if (o.hi) window.hi = *o.hi;
  const auto fit = harness::fit_tail_exponent(series, window, mode, o.p);
  bool ok = true;
  if (o.slope_min) ok = ok && fit.slope >= *o.slope_min;
  if (o.slope_max) ok = ok && fit.slope <= *o.slope_max;
  std::string text = "mode=" + std::string(harness::to_string(fit.mode)) + "\nwindow_lo=" +
                     fmt(fit.window.lo) + "\nwindow_hi=" + fmt(fit.window.hi) +
                     "\nsamples=" + std::to_string(fit.samples) + "\nslope=" + fmt(fit.slope) +
                     "\nstderr=" + fmt(fit.std_error) + "\nr_squared=" + fmt(fit.r_squared) +
                     "\npassed=" + (ok ? "true" : "false") + "\n";
  emit(o.out, "fit.kv", text);
  return ok ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct CompareOptions {
  LawOptions law;
  std::string trace;
  std::string out;
  std::string kind = "simplified";
  std::optional<double> calibrate_at;
  std::optional<double> beta, M;
  double kappa = 1.0;
  double T0 = 0.0, T1 = 0.0, gamma_s = 1.0, C_s = 1.0, alpha = 1.0;
  std::optional<double> lo, hi;
  // ODE mode
  double z0 = 0.0;
  double horizon = 100.0;
  int points = 101;
};

transform::EnvelopeKind parse_kind(const std::string& k) {
  using transform::EnvelopeKind;
  static const std::map<std::string, EnvelopeKind> kinds = {
      {"general", EnvelopeKind::general}, {"simplified", EnvelopeKind::simplified},
      {"poly", EnvelopeKind::poly},       {"expo", EnvelopeKind::expo},
      {"lower", EnvelopeKind::lower}};
  const auto it = kinds.find(k);
  if (it == kinds.end()) throw ConfigError("unknown envelope kind '" + k + "'");
  return it->second;
}

int cmd_compare_ode(const CompareOptions& o, const feedback::FeedbackLaw& law) {
  const double z0 = o.z0 > 0.0 ? o.z0 : law.h_max();
  const auto sol = compare::solve_comparison(law, o.kappa, z0, o.horizon, o.points);
  transform::DecayEnvelope env;
  env.kind = transform::EnvelopeKind::lower;
  env.law = law;
  env.T0 = o.T0;
  env.T1 = o.T1;
  env.gamma_s = o.gamma_s;
  env.C_s = o.C_s;
  const double start = transform::envelope_domain_start(env);
  std::string text = "t,z,K_inverse,lower_envelope\n";
  char row[160];
  for (const auto& s : sol.samples) {
    const double k = compare::K_inverse(law, o.kappa * s.t, z0);
    const double lower = s.t >= start ? compare::lower_envelope(env, s.t) : std::nan("");
    std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.z, k, lower);
    text += row;
  }
  emit(o.out, "comparison.csv", text);
  return kPass;
}

int cmd_compare(const CompareOptions& o) {
  const auto law = o.law.resolve();
  if (o.trace.empty()) return cmd_compare_ode(o, law);

  const auto trace = wave::read_trace_csv(o.trace);
  const auto series = harness::series_from_trace(trace);
  const auto kind = parse_kind(o.kind);
  harness::Window window{series.t.front(), series.t.back()};
  if (o.lo) window.lo = *o.lo;
  if (o.hi) window.hi = *o.hi;

  transform::DecayEnvelope env;
  if (o.calibrate_at) {
    const double t_c = *o.calibrate_at;
    window.lo = std::max(window.lo, t_c);
    switch (kind) {
      case transform::EnvelopeKind::simplified:
        env = harness::calibrate_simplified(law, series, t_c, o.beta, o.kappa);
        break;
      case transform::EnvelopeKind::general:
        env = harness::calibrate_general(law, series, t_c, o.beta);
        break;
      case transform::EnvelopeKind::lower:
        env = harness::calibrate_lower(law, series, t_c,
                                       compare::gamma_s(trace.samples.front().E1), o.T0);
        break;
      default:
        throw ConfigError("calibration supports general, simplified and lower envelopes");
    }
  } else {
    env.kind = kind;
    env.law = law;
    env.beta = o.beta.value_or(1.0);
    env.M = o.M.value_or(1.0);
    env.kappa = o.kappa;
    env.T0 = o.T0;
    env.T1 = o.T1;
    env.gamma_s = o.gamma_s;
    env.C_s = o.C_s;
    env.alpha = o.alpha;
    env.e0 = series.E.front();
  }
  const auto report = harness::compare_to_envelope(series, env, window);
  const auto& m = *report.margins;
  const bool lower = kind == transform::EnvelopeKind::lower;
  const bool ok = lower ? harness::lower_envelope_holds(m) : harness::upper_envelope_holds(m);
  std::string text = "kind=" + o.kind + "\nbeta=" + fmt(env.beta) + "\nM=" + fmt(env.M) +
                     "\nt_start=" + fmt(m.t_start) + "\nsamples=" + std::to_string(m.samples) +
                     "\nmargin_min=" + fmt(m.min) + "\nmargin_max=" + fmt(m.max) +
                     "\npassed=" + (ok ? "true" : "false") + "\n";
  emit(o.out, "compare.kv", text);
  return ok ? kPass : kFail;
}

// ---------------------------------------------------------------------------

int cmd_suite(const std::string& out) {
  std::string text;
  bool ok = true;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    ok = ok && pass;
    text += std::string(pass ? "PASS  " : "FAIL  ") + name + "  " + detail + "\n";
  };
  for (const auto& c : harness::lemma_suite().checks) line(c.passed, c.name, c.detail);
  for (const auto& a : harness::invariant_batteries()) line(a.passed, a.name, a.detail);
  text += std::string("suite ") + (ok ? "passed" : "failed") + "\n";
  emit(out, "suite.txt", text);
  return ok ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
  std::string config;
  std::string out = "sweep";
  unsigned jobs = 0;
};

struct SweepOutcome {
  std::string name;
  int code = kPass;
  std::string message;
};

SweepOutcome run_one(const fs::path& path, const fs::path& out_root) {
  SweepOutcome r;
  r.name = path.stem().string();
  try {
    auto cfg = harness::load_config(path.string());
    cfg.output.dir = (out_root / r.name).string();
    const auto result = harness::run_experiment(cfg);
    r.code = result.passed() ? kPass : kFail;
    r.message = result.passed() ? "pass" : "assertion failed";
  } catch (const ConfigError& e) {
    r.code = kConfigError;
    r.message = e.what();
  } catch (const std::exception& e) {
    r.code = kFail;
    r.message = e.what();
  }
  return r;
}

int cmd_sweep(const SweepOptions& o) {
  if (!fs::is_directory(o.config)) throw ConfigError("sweep: " + o.config + " is not a directory");
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(o.config)) {
    if (entry.path().extension() == ".ini") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw ConfigError("sweep: no .ini files in " + o.config);

  const unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepOutcome> outcomes(configs.size());
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    std::vector<std::future<SweepOutcome>> batch;
    for (std::size_t i = start; i < std::min(configs.size(), start + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, run_one, configs[i], fs::path(o.out)));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) outcomes[start + k] = batch[k].get();
  }

  int code = kPass;
  std::string text;
  for (const auto& r : outcomes) {
    text += r.name + "\t" + std::to_string(r.code) + "\t" + r.message + "\n";
    code = std::max(code, r.code);
  }
  emit(o.out, "sweep.tsv", text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay-rate experiments for nonlinearly damped coupled wave systems"};
  app.require_subcommand(1);

  CalcOptions calc;
  auto* c = app.add_subcommand("calc", "Evaluate feedback calculus and envelopes (tab-separated)");
  add_law_options(c, calc.law);
  c->add_option("--quantity", calc.quantities,
                "g H H_prime lambda H_prime_inverse conjugate L L_inverse psi0 psi0_inverse "
                "envelope_general envelope_simplified");
  c->add_option("--at", calc.at, "Evaluation points (default: 10 points on (0, r0^2])");
  c->add_option("--beta", calc.beta);
  c->add_option("--M", calc.M);
  c->add_option("--kappa", calc.kappa);
  c->add_flag("--limits", calc.limits, "Also report the Lambda_H limit estimate and convexity");
  c->add_option("--out", calc.out, "Directory for calc.tsv");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Run an experiment config: trace CSV and reports");
  s->add_option("--config", sim.config, "Experiment config")->required();
  s->add_option("--out", sim.out, "Output directory (overrides the config)");
  s->add_flag("--trace-only", sim.trace_only, "Write the trace without analysis");

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Fit the tail decay exponent of a trace CSV");
  f->add_option("--trace", fit.trace, "Trace CSV")->required();
  f->add_option("--mode", fit.mode, "power | log_log | stretched | exponential");
  f->add_option("--p", fit.p, "Exponent for the stretched mode");
  f->add_option("--lo", fit.lo, "Window start");
  f->add_option("--hi", fit.hi, "Window end");
  f->add_option("--t-min-fraction", fit.t_min_fraction);
  f->add_option("--t-max-fraction", fit.t_max_fraction);
  f->add_option("--slope-min", fit.slope_min, "Fail unless slope >= value");
  f->add_option("--slope-max", fit.slope_max, "Fail unless slope <= value");
  f->add_option("--out", fit.out, "Directory for fit.kv");

  CompareOptions cmp;
  auto* m = app.add_subcommand(
      "compare", "Compare a trace with an envelope, or tabulate the comparison ODE without --trace");
  add_law_options(m, cmp.law);
  m->add_option("--trace", cmp.trace, "Trace CSV");
  m->add_option("--kind", cmp.kind, "general | simplified | poly | expo | lower");
  m->add_option("--calibrate-at", cmp.calibrate_at, "Match the envelope to the trace at t");
  m->add_option("--beta", cmp.beta);
  m->add_option("--M", cmp.M);
  m->add_option("--kappa", cmp.kappa);
  m->add_option("--T0", cmp.T0);
  m->add_option("--T1", cmp.T1);
  m->add_option("--gamma-s", cmp.gamma_s);
  m->add_option("--C-s", cmp.C_s);
  m->add_option("--alpha", cmp.alpha, "Exponent of the poly envelope");
  m->add_option("--lo", cmp.lo);
  m->add_option("--hi", cmp.hi);
  m->add_option("--z0", cmp.z0, "ODE initial value (default r0^2)");
  m->add_option("--horizon", cmp.horizon, "ODE horizon");
  m->add_option("--points", cmp.points, "ODE output points");
  m->add_option("--out", cmp.out, "Output directory");

  std::string suite_out;
  auto* u = app.add_subcommand("suite", "Run the lemma suite and invariant batteries");
  u->add_option("--out", suite_out, "Directory for suite.txt");

  SweepOptions sweep;
  auto* w = app.add_subcommand("sweep", "Run every .ini config in a directory in parallel");
  w->add_option("--config", sweep.config, "Directory of configs")->required();
  w->add_option("--out", sweep.out, "Output root; one subdirectory per config");
  w->add_option("--jobs", sweep.jobs, "Parallel experiments (default: hardware threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*c) return cmd_calc(calc);
    if (*s) return cmd_simulate(sim);
    if (*f) return cmd_fit(fit);
    if (*m) return cmd_compare(cmp);
    if (*u) return cmd_suite(suite_out);
    if (*w) return cmd_sweep(sweep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const ClassificationError& e) {
    std::cerr << "unsupported law: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kConfigError;
}
