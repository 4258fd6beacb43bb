#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decaylab/compare.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/harness.hpp"

namespace decaylab::harness {

namespace fs = std::filesystem;

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

bool ExperimentResult::passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

std::string ExperimentResult::key_values() const {
  std::string out;
  for (const auto& [k, v] : report) out += k + "=" + v + "\n";
  for (const auto& a : assertions) out += "assert." + a.name + "=" + (a.passed ? "pass" : "fail") + "\n";
  out += std::string("passed=") + (passed() ? "true" : "false") + "\n";
  return out;
}

std::string ExperimentResult::text() const {
  std::ostringstream out;
  out << "experiment " << config.name << "\n\n";
  std::size_t width = 0;
  for (const auto& kv : report) width = std::max(width, kv.first.size());
  for (const auto& [k, v] : report) {
    out << "  " << k << std::string(width - k.size() + 2, ' ') << v << "\n";
  }
  out << "\nassertions\n";
  for (const auto& a : assertions) {
    out << "  [" << (a.passed ? "PASS" : "FAIL") << "] " << a.name;
    if (!a.detail.empty()) out << ": " << a.detail;
    out << "\n";
  }
  if (!notes.empty()) {
    out << "\nnotes\n";
    for (const auto& n : notes) out << "  - " << n << "\n";
  }
  out << "\nresult: " << (passed() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

namespace {

std::string support(const feedback::CoefficientField& f) {
  if (f.is_zero()) return "none";
  char buf[160];
  std::snprintf(buf, sizeof buf, "(%g, %g) %s floor %g cap %g", f.left, f.right,
                std::string(feedback::to_string(f.profile)).c_str(), f.floor, f.cap);
  return buf;
}

struct Context {
  ExperimentResult& result;
  void put(const std::string& key, const std::string& value) { result.report.emplace_back(key, value); }
  void put(const std::string& key, double value) { put(key, format_number(value)); }
  void check(const std::string& name, bool ok, const std::string& detail) {
    result.assertions.push_back({name, ok, detail});
  }
  void note(const std::string& text) { result.notes.push_back(text); }
};

double measure_weighted_M(const ExperimentConfig& cfg, const Series& series, double beta,
                          bool tail) {
  const auto& law = cfg.sim.law;
  Weight w;
  if (law.family == feedback::Family::linear) {
    w = [](double) { return 1.0; };
  } else {
    w = [&law, beta, mode = cfg.weight_mode](double e) {
      return transform::optimal_weight(law, e, beta, mode);
    };
  }
  InequalityOptions opts;
  opts.extrapolate_tail = tail;
  return check_integral_inequality(series, w, kInfinity, opts).M;
}

void envelope_section(Context& ctx, const std::string& prefix, const Series& series,
                      const DecayEnvelope& env, Window window, bool upper) {
  const auto rep = compare_to_envelope(series, env, window);
  const auto& m = *rep.margins;
  ctx.put(prefix + ".M", env.M);
  ctx.put(prefix + ".t_start", m.t_start);
  ctx.put(prefix + ".margin_min", m.min);
  ctx.put(prefix + ".margin_max", m.max);
  ctx.put(prefix + ".samples", std::to_string(m.samples));
  const bool ok = upper ? upper_envelope_holds(m) : lower_envelope_holds(m);
  ctx.put(prefix + ".holds", ok ? "true" : "false");
  if (!ok) {
    ctx.note(prefix + " envelope " + (upper ? "exceeded (max margin " : "undercut (min margin ") +
             format_number(upper ? m.max : m.min) + ")");
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
  ExperimentResult result;
  result.config = cfg;
  result.notes = cfg.warnings;
  Context ctx{result};
  const auto& law = cfg.sim.law;

  result.trace = wave::run(cfg.sim);
  const auto& trace = result.trace;
  const auto& meta = trace.meta;
  const Series series = series_from_trace(trace);
  const double e0 = series.E.front();

  ctx.put("config_digest", meta.config_digest);
  ctx.put("law", law.describe());
  ctx.put("coupling", support(cfg.sim.alpha));
  ctx.put("damping", support(cfg.sim.damping));
  ctx.put("geometric_condition", "satisfied (one space dimension)");
  ctx.put("grid.n", std::to_string(meta.n));
  ctx.put("grid.dx", meta.dx);
  ctx.put("grid.dt", meta.dt);
  ctx.put("steps", std::to_string(meta.steps));
  ctx.put("stopped_early", meta.stopped_early ? "true" : "false");
  ctx.put("E0", e0);
  ctx.put("E1_0", trace.samples.front().E1);
  ctx.put("E_final", series.E.back());
  ctx.put("t_final", series.t.back());
  ctx.put("max_step_increase", meta.max_step_increase);
  ctx.put("max_drift", meta.max_drift);

  ctx.check("energy_monotone", meta.max_step_increase <= 1e-11,
            "max per-step increase " + format_number(meta.max_step_increase) + " E(0)");

  const bool damped = !cfg.sim.damping.is_zero();
  if (!damped) {
    ctx.check("energy_conserved", meta.max_drift <= 1e-6,
              "max relative drift " + format_number(meta.max_drift));
    ctx.put("fit", "skipped (no damping)");
    ctx.note("undamped run: conservation checked, no fit attempted");
  } else if (!(e0 > 0.0)) {
    ctx.put("fit", "skipped (zero energy)");
    ctx.note("zero initial energy: nothing to fit");
  } else {
    // Tail fit.
    Window window{};
    try {
      window = default_window(series, cfg.fit.mode, cfg.fit.t_min_fraction, cfg.fit.t_max_fraction);
      const auto fit = fit_tail_exponent(series, window, cfg.fit.mode, cfg.fit.stretched_p);
      ctx.put("fit.mode", std::string(to_string(fit.mode)));
      ctx.put("fit.window_lo", fit.window.lo);
      ctx.put("fit.window_hi", fit.window.hi);
      ctx.put("fit.samples", std::to_string(fit.samples));
      ctx.put("fit.slope", fit.slope);
      ctx.put("fit.stderr", fit.std_error);
      ctx.put("fit.r_squared", fit.r_squared);
      if (cfg.fit.mode == FitMode::power && law.family == feedback::Family::power) {
        const double p = law.params.p;
        const double lo = -4.0 / (p - 1.0) - 0.3;
        const double hi = -2.0 / (p - 1.0) + 0.3;
        ctx.put("fit.bracket_lo", lo);
        ctx.put("fit.bracket_hi", hi);
        ctx.check("tail_slope_in_bracket", fit.slope >= lo && fit.slope <= hi,
                  "slope " + format_number(fit.slope) + " in [" + format_number(lo) + ", " +
                      format_number(hi) + "]");
      }
      if (cfg.fit.mode == FitMode::exponential) {
        ctx.check("exponential_tail", fit.slope < 0.0 && fit.r_squared >= 0.98,
                  "slope " + format_number(fit.slope) + ", r^2 " + format_number(fit.r_squared));
      }
    } catch (const DomainError& e) {
      ctx.check("tail_fit", false, e.what());
    }

    // Weighted integral inequality.
    const bool linear = law.family == feedback::Family::linear;
    const double beta = cfg.envelope.beta.value.value_or(
        linear ? 1.0 : transform::minimal_beta(law, e0));
    try {
      if (!linear) ctx.put("weight.beta", beta);
      ctx.put("weight.kind", linear ? "constant"
                                     : cfg.weight_mode == transform::WeightMode::optimal
                                           ? "optimal"
                                           : "polynomial");
      const double M = measure_weighted_M(cfg, series, beta, false);
      const double M_tail = measure_weighted_M(cfg, series, beta, true);
      ctx.put("weight.M", M);
      ctx.put("weight.M_tail_extrapolated", M_tail);
      ctx.check("weighted_inequality_finite", std::isfinite(M) && M > 0.0,
                "M " + format_number(M));
      if (cfg.check_horizon_doubling) {
        auto longer = cfg;
        longer.sim.t_final *= 2.0;
        const auto trace2 = wave::run(longer.sim);
        const double M2 = measure_weighted_M(longer, series_from_trace(trace2), beta, false);
        const double change = std::abs(M2 - M) / M;
        ctx.put("weight.M_doubled_horizon", M2);
        ctx.put("weight.M_relative_change", change);
        ctx.check("weighted_inequality_stable", change < 0.1,
                  "relative change " + format_number(change) + " on doubling T");
      }
      if (linear && std::isfinite(M)) {
        DecayEnvelope env;
        env.kind = transform::EnvelopeKind::expo;
        env.M = M;
        env.e0 = e0;
        envelope_section(ctx, "envelope.expo", series, env, {0.0, series.t.back()}, true);
      }
      if (law.family == feedback::Family::power && std::isfinite(M)) {
        const double a = 0.5 * (law.params.p - 1.0);
        const auto poly = check_integral_inequality(
            series, [a](double e) { return std::pow(e, a); });
        DecayEnvelope env;
        env.kind = transform::EnvelopeKind::poly;
        env.M = poly.M;
        env.e0 = e0;
        env.alpha = a;
        envelope_section(ctx, "envelope.poly", series, env, {0.0, series.t.back()}, true);
      }
    } catch (const std::exception& e) {
      ctx.check("weighted_inequality_finite", false, e.what());
    }

    // Calibrated envelopes on [window.lo, T].
    if (!linear && window.hi > window.lo && feedback::is_away_from_linear(law)) {
      const Window tail{window.lo, series.t.back()};
      const double t_c = window.lo;
      ctx.put("envelope.calibration_time", t_c);
      try {
        auto env = calibrate_simplified(law, series, t_c, beta, cfg.envelope.kappa);
        if (cfg.envelope.M.value) env.M = *cfg.envelope.M.value;
        envelope_section(ctx, "envelope.simplified", series, env, tail, true);
      } catch (const std::exception& e) {
        ctx.note(std::string("simplified envelope skipped: ") + e.what());
      }
      try {
        auto env = calibrate_general(law, series, t_c, beta);
        if (cfg.envelope.M.value) env.M = *cfg.envelope.M.value;
        envelope_section(ctx, "envelope.general", series, env, tail, true);
      } catch (const std::exception& e) {
        ctx.note(std::string("general envelope skipped: ") + e.what());
      }
      try {
        const auto screening = compare::screen_lower_hypothesis(law, law.h_max());
        ctx.put("lower.screening", screening.passes ? "pass" : "fail");
        const double e1 = trace.samples.front().E1;
        if (!cfg.sim.smooth_data || !(e1 > 0.0)) {
          ctx.note("lower envelope skipped: needs smooth data with E1(0) > 0");
        } else if (screening.passes) {
          const double gamma = compare::gamma_s(e1);
          double T0 = 0.0;
          if (cfg.envelope.T0.value) {
            T0 = *cfg.envelope.T0.value;
          } else if (auto est = compare::estimate_T0(trace, law, gamma)) {
            T0 = *est;
          } else {
            ctx.note("T0 not reached within the run; lower envelope uses T0 = 0");
          }
          ctx.put("lower.gamma_s", gamma);
          ctx.put("lower.T0", T0);
          // The envelope needs t - T0 >= 1/H'(r0^2); start no earlier than that.
          const double reach = 1.0 / feedback::eval_H_prime(law, law.h_max());
          const double t_lower = std::max(t_c, T0 + std::max(cfg.envelope.T1, reach));
          ctx.put("lower.calibration_time", t_lower);
          auto env = calibrate_lower(law, series, t_lower, gamma, T0);
          if (cfg.envelope.gamma_s_C_s.value) {
            env.gamma_s = 1.0;
            env.C_s = *cfg.envelope.gamma_s_C_s.value;
          }
          ctx.put("lower.C_s", env.C_s);
          envelope_section(ctx, "envelope.lower", series, env, tail, false);
        }
      } catch (const std::exception& e) {
        ctx.note(std::string("lower envelope skipped: ") + e.what());
      }
    }
  }

  if (write_files) {
    const fs::path dir(cfg.output.dir);
    write_file_atomic((dir / cfg.output.trace).string(), wave::trace_csv(trace));
    write_file_atomic((dir / (cfg.output.report + ".txt")).string(), result.text());
    write_file_atomic((dir / (cfg.output.report + ".kv")).string(), result.key_values());
  }
  return result;
}

}  // namespace decaylab::harness
