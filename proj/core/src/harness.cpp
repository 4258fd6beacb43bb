#include "decaylab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "decaylab/compare.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/quadrature.hpp"

namespace decaylab::harness {

namespace {

constexpr int kMinFitSamples = 10;

double half_line_integral(const std::function<double(double)>& f, double a) {
  try {
    boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(f, a, kInfinity, 1e-12, &error, &l1);
    if (!std::isfinite(value) || error > 1e-8 * std::max(l1, 1e-300)) return kInfinity;
    return value;
  } catch (const std::exception&) {
    return kInfinity;
  }
}

double finite_integral(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  numeric::SimpsonOptions opts;
  opts.rel_tol = 1e-11;
  const auto r = numeric::adaptive_simpson(f, a, b, opts);
  return r.converged ? r.value : kInfinity;
}

void require_monotone(const std::vector<double>& E, double tolerance, const char* where) {
  if (E.empty()) throw DomainError(std::string(where) + ": empty input");
  const double scale = std::abs(E.front());
  for (std::size_t i = 0; i < E.size(); ++i) {
    if (!(E[i] >= 0.0)) throw DomainError(std::string(where) + ": negative or NaN energy");
    if (i > 0 && E[i] - E[i - 1] > tolerance * scale) {
      throw DomainError(std::string(where) + ": energy increases at sample " + std::to_string(i));
    }
  }
}

void finish(InequalityReport& report) {
  report.M = 0.0;
  for (double r : report.ratios) report.M = std::max(report.M, r);
  report.passed = std::isfinite(report.M) && report.M <= report.M_bound;
}

double abscissa(FitMode mode, double t, double p) {
  switch (mode) {
    case FitMode::power: return t > 0.0 ? std::log(t) : std::nan("");
    case FitMode::log_log: return t > 1.0 ? std::log(std::log(t)) : std::nan("");
    case FitMode::stretched: return t > 1.0 ? std::pow(std::log(t), 1.0 / p) : std::nan("");
    case FitMode::exponential: return t;
  }
  return std::nan("");
}

std::string fmt_check(double value) {
  std::ostringstream out;
  out.precision(10);
  out << value;
  return out.str();
}

}  // namespace

Series series_from_trace(const wave::EnergyTrace& trace) {
  Series s;
  s.t.reserve(trace.samples.size());
  s.E.reserve(trace.samples.size());
  for (const auto& sample : trace.samples) {
    s.t.push_back(sample.t);
    s.E.push_back(sample.E);
  }
  return s;
}

Series sample_function(const std::function<double(double)>& E, double t0, double t1, int points) {
  if (points < 2 || !(t1 > t0)) throw DomainError("sample_function: bad grid");
  Series s;
  for (int i = 0; i < points; ++i) {
    const double t = t0 + (t1 - t0) * i / (points - 1);
    s.t.push_back(t);
    s.E.push_back(E(t));
  }
  return s;
}

double interpolate(const Series& series, double t) {
  const auto& ts = series.t;
  if (ts.empty() || t < ts.front() || t > ts.back()) {
    throw DomainError("interpolate: t outside the series");
  }
  const auto it = std::lower_bound(ts.begin(), ts.end(), t);
  const auto i = static_cast<std::size_t>(it - ts.begin());
  if (ts[i] == t || i == 0) return series.E[i];
  const double f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  return series.E[i - 1] + f * (series.E[i] - series.E[i - 1]);
}

InequalityReport check_integral_inequality(const Series& series, const Weight& w, double M_bound,
                                           const InequalityOptions& options) {
  const auto& t = series.t;
  const auto& E = series.E;
  if (t.size() != E.size() || t.size() < 2) {
    throw DomainError("check_integral_inequality: need at least two samples");
  }
  if (options.start_points < 1) throw DomainError("check_integral_inequality: no start points");
  require_monotone(E, options.monotone_tolerance, "check_integral_inequality");

  const std::size_t n = t.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = E[i] > 0.0 ? w(E[i]) * E[i] : 0.0;
  // suffix[i] = trapezoid integral over [t_i, t_last]
  std::vector<double> suffix(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix[i] = suffix[i + 1] + 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  }

  InequalityReport report;
  report.M_bound = M_bound;
  report.horizon = t.back();
  if (options.extrapolate_tail && E.back() > 0.0) {
    report.tail_extrapolated = true;
    try {
      const auto fit = fit_tail_exponent(series, default_window(series, FitMode::power));
      const double T = t.back();
      const double ET = E.back();
      const double s = fit.slope;
      if (!(s < 0.0)) {
        report.tail_integral = kInfinity;
      } else {
        report.tail_integral = half_line_integral(
            [&](double x) {
              const double e = ET * std::pow(x / T, s);
              return e > 0.0 ? w(e) * e : 0.0;
            },
            T);
      }
    } catch (const DomainError&) {
      report.tail_integral = kInfinity;
    }
  }

  const double t0 = t.front();
  const double span = t.back() - t0;
  std::size_t idx = 0;
  for (int k = 0; k < options.start_points; ++k) {
    const double S = t0 + span * k / options.start_points;
    while (idx + 1 < n && t[idx] < S) ++idx;
    const double integral = suffix[idx] + report.tail_integral;
    report.starts.push_back(t[idx]);
    if (E[idx] > 0.0) {
      report.ratios.push_back(integral / E[idx]);
    } else {
      report.ratios.push_back(integral > 0.0 ? kInfinity : 0.0);
    }
  }
  finish(report);
  return report;
}

InequalityReport check_integral_inequality(const std::function<double(double)>& E,
                                           const Weight& w, double M_bound,
                                           const InequalityOptions& options) {
  if (options.start_points < 1) throw DomainError("check_integral_inequality: no start points");
  const double s_max = std::min(options.start_max, options.horizon);
  if (!(s_max > 0.0)) throw DomainError("check_integral_inequality: empty start range");
  {
    const double probe_end = std::isfinite(options.horizon) ? options.horizon : 2.0 * s_max;
    std::vector<double> probe;
    for (int i = 0; i <= 2000; ++i) probe.push_back(E(probe_end * i / 2000.0));
    require_monotone(probe, options.monotone_tolerance, "check_integral_inequality");
  }

  auto integrand = [&](double s) {
    const double e = E(s);
    return e > 0.0 ? w(e) * e : 0.0;
  };

  InequalityReport report;
  report.M_bound = M_bound;
  report.horizon = options.horizon;
  const int n = options.start_points;
  for (int k = 0; k < n; ++k) {
    const double S = n == 1 ? 0.0 : s_max * k / (n - 1);
    const double integral = std::isfinite(options.horizon)
                                ? finite_integral(integrand, S, options.horizon)
                                : half_line_integral(integrand, S);
    const double e = E(S);
    report.starts.push_back(S);
    report.ratios.push_back(e > 0.0 ? integral / e : (integral > 0.0 ? kInfinity : 0.0));
  }
  finish(report);
  return report;
}

bool LemmaReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.passed; });
}

LemmaReport lemma_suite() {
  using Fn = std::function<double(double)>;
  constexpr double kHorizon = 200.0;
  constexpr int kGrid = 2000;
  constexpr double kSlack = 1e-9;

  LemmaReport report;
  auto pointwise = [&](LemmaCheck& check, const Fn& E, const Fn& bound, double from) {
    check.worst_ratio = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
      const double t = from + (kHorizon - from) * i / kGrid;
      check.worst_ratio = std::max(check.worst_ratio, E(t) / bound(t));
    }
    check.passed = std::isfinite(check.measured) && check.worst_ratio <= 1.0 + kSlack;
  };

  struct PolyCase {
    std::string label;
    Fn E;
    double alpha;
  };
  const std::vector<PolyCase> poly_cases = {
      {"1/(1+t)", [](double t) { return 1.0 / (1.0 + t); }, 1.0},
      {"(1+t)^-2", [](double t) { return std::pow(1.0 + t, -2.0); }, 0.5},
      {"2/(1+t)^0.5", [](double t) { return 2.0 / std::sqrt(1.0 + t); }, 4.0},
  };

  // Polynomial weight, bound valid for t >= T with T = M / E(0)^alpha.
  for (const auto& c : poly_cases) {
    LemmaCheck check;
    check.name = "polynomial_weight_lemma " + c.label + " alpha=" + fmt_check(c.alpha);
    const double a = c.alpha;
    const auto ineq = check_integral_inequality(c.E, [a](double y) { return std::pow(y, a); });
    const double e0 = c.E(0.0);
    const double T = ineq.M / std::pow(e0, a);
    check.measured = T;
    pointwise(
        check, c.E,
        [=](double t) { return e0 * std::pow((T + a * t) / (T + a * T), -1.0 / a); },
        std::min(T, kHorizon));
    check.detail = "T = " + fmt_check(T);
    report.checks.push_back(std::move(check));
  }

  // Reformulated polynomial bound, valid for all t >= 0.
  for (const auto& c : poly_cases) {
    LemmaCheck check;
    check.name = "polynomial_weight_corollary " + c.label + " alpha=" + fmt_check(c.alpha);
    const double a = c.alpha;
    const auto ineq = check_integral_inequality(c.E, [a](double y) { return std::pow(y, a); });
    transform::DecayEnvelope env;
    env.kind = transform::EnvelopeKind::poly;
    env.M = ineq.M;
    env.e0 = c.E(0.0);
    env.alpha = a;
    check.measured = ineq.M;
    pointwise(check, c.E, [&](double t) { return transform::envelope_poly(env, t); }, 0.0);
    check.detail = "M = " + fmt_check(ineq.M);
    report.checks.push_back(std::move(check));
  }

  // Constant weight, exponential bound for t >= T.
  const std::vector<std::pair<std::string, Fn>> expo_cases = {
      {"exp(-t)", [](double t) { return std::exp(-t); }},
      {"3exp(-2t)", [](double t) { return 3.0 * std::exp(-2.0 * t); }},
  };
  for (const auto& [label, E] : expo_cases) {
    LemmaCheck check;
    check.name = "exponential_lemma " + label;
    InequalityOptions opts;
    opts.start_max = 20.0;
    const auto ineq = check_integral_inequality(E, [](double) { return 1.0; }, kInfinity, opts);
    transform::DecayEnvelope env;
    env.kind = transform::EnvelopeKind::expo;
    env.M = ineq.M;
    env.e0 = E(0.0);
    check.measured = ineq.M;
    pointwise(check, E, [&](double t) { return transform::envelope_expo(env, t); },
              std::min(ineq.M, kHorizon));
    check.detail = "T = " + fmt_check(ineq.M);
    report.checks.push_back(std::move(check));
  }

  // General weight w(y) = y.
  {
    LemmaCheck check;
    check.name = "general_weight_theorem 1/(1+t) w(y)=y";
    const Fn E = [](double t) { return 1.0 / (1.0 + t); };
    const Weight w = [](double y) { return y; };
    const auto ineq = check_integral_inequality(E, w);
    const double total = half_line_integral([&](double t) { return w(E(t)) * E(t); }, 0.0);
    const double r = std::max(1.0, total / ineq.M);
    const transform::GeneralWeight weight(w, r);
    check.measured = ineq.M;
    const double from = ineq.M / weight.w(r);
    pointwise(check, E, [&](double t) { return weight.decay_bound(t, ineq.M); }, from);
    check.detail = "M = " + fmt_check(ineq.M) + ", r = " + fmt_check(r);
    report.checks.push_back(std::move(check));
  }
  return report;
}

Window default_window(const Series& series, FitMode mode, double t_min_fraction,
                      double t_max_fraction) {
  if (series.t.size() < 2) throw DomainError("default_window: series too short");
  if (!(t_min_fraction >= 0.0 && t_min_fraction < t_max_fraction && t_max_fraction <= 1.0)) {
    throw DomainError("default_window: fractions must satisfy 0 <= lo < hi <= 1");
  }
  const double end = series.t.back();
  if (mode == FitMode::exponential) {
    const double start = series.t.front();
    return {start + t_min_fraction * (end - start), start + t_max_fraction * (end - start)};
  }
  double first = 1.0;
  for (double t : series.t) {
    if (t > 0.0) {
      first = std::max(first, t);
      break;
    }
  }
  if (!(end > first)) throw DomainError("default_window: trace ends before t = 1");
  const double a = std::log(first);
  const double b = std::log(end);
  return {std::exp(a + t_min_fraction * (b - a)),
          t_max_fraction == 1.0 ? end : std::exp(a + t_max_fraction * (b - a))};
}

FitReport fit_tail_exponent(const Series& series, Window window, FitMode mode,
                            double stretched_p) {
  if (!(window.lo < window.hi)) throw DomainError("fit_tail_exponent: degenerate window");
  if (mode == FitMode::stretched && !(stretched_p > 0.0)) {
    throw DomainError("fit_tail_exponent: stretched mode needs p > 0");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const double t = series.t[i];
    if (t < window.lo || t > window.hi) continue;
    const double x = abscissa(mode, t, stretched_p);
    if (!std::isfinite(x)) continue;
    if (!(series.E[i] > 0.0)) {
      throw DomainError("fit_tail_exponent: energy not positive at t = " + std::to_string(t));
    }
    xs.push_back(x);
    ys.push_back(std::log(series.E[i]));
  }
  const int n = static_cast<int>(xs.size());
  if (n < kMinFitSamples) {
    throw DomainError("fit_tail_exponent: " + std::to_string(n) +
                      " samples in window, need at least 10");
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_tail_exponent: abscissa is constant on the window");

  FitReport report;
  report.mode = mode;
  report.window = window;
  report.samples = n;
  report.slope = sxy / sxx;
  report.intercept = my - report.slope * mx;
  const double sse = std::max(0.0, syy - report.slope * sxy);
  report.std_error = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  report.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return report;
}

double envelope_value(const DecayEnvelope& env, double t) {
  switch (env.kind) {
    case transform::EnvelopeKind::general: return transform::envelope_general(env, t);
    case transform::EnvelopeKind::simplified: return transform::envelope_simplified(env, t);
    case transform::EnvelopeKind::poly: return transform::envelope_poly(env, t);
    case transform::EnvelopeKind::expo: return transform::envelope_expo(env, t);
    case transform::EnvelopeKind::lower: return compare::lower_envelope(env, t);
  }
  return 0.0;
}

FitReport compare_to_envelope(const Series& series, const DecayEnvelope& env, Window window,
                              int max_points) {
  const double start = std::max(window.lo, transform::envelope_domain_start(env));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    if (series.t[i] >= start && series.t[i] <= window.hi) idx.push_back(i);
  }
  if (idx.empty()) throw DomainError("compare_to_envelope: trace and envelope domains do not overlap");
  if (env.kind == transform::EnvelopeKind::general && max_points > 1 &&
      static_cast<int>(idx.size()) > max_points) {
    std::vector<std::size_t> thinned;
    for (int k = 0; k < max_points; ++k) {
      thinned.push_back(idx[k * (idx.size() - 1) / (max_points - 1)]);
    }
    idx = std::move(thinned);
  }

  EnvelopeMargins m;
  m.min = kInfinity;
  m.max = -kInfinity;
  m.t_start = series.t[idx.front()];
  for (std::size_t i : idx) {
    const double ratio = series.E[i] / envelope_value(env, series.t[i]);
    m.min = std::min(m.min, ratio);
    m.max = std::max(m.max, ratio);
    ++m.samples;
  }

  FitReport report;
  try {
    report = fit_tail_exponent(series, {m.t_start, window.hi});
  } catch (const DomainError&) {
    report.window = {m.t_start, window.hi};
  }
  report.margins = m;
  return report;
}

namespace {

double resolve_beta(const FeedbackLaw& law, const Series& series, std::optional<double> beta) {
  if (series.E.empty() || !(series.E.front() > 0.0)) {
    throw DomainError("calibration: series must start with positive energy");
  }
  const double b = beta.value_or(transform::minimal_beta(law, series.E.front()));
  if (!(b > 0.0)) throw DomainError("calibration: beta must be positive");
  return b;
}

double energy_at(const Series& series, double t_c) {
  const double e = interpolate(series, t_c);
  if (!(e > 0.0)) throw DomainError("calibration: energy vanishes at the calibration time");
  return e;
}

}  // namespace

DecayEnvelope calibrate_simplified(const FeedbackLaw& law, const Series& series, double t_c,
                                   std::optional<double> beta, double kappa) {
  DecayEnvelope env;
  env.kind = transform::EnvelopeKind::simplified;
  env.law = law;
  env.beta = resolve_beta(law, series, beta);
  env.kappa = kappa;
  const double x = std::min(energy_at(series, t_c) / (2.0 * env.beta), law.h_max());
  env.M = t_c * feedback::eval_H_prime(law, x) / kappa;
  env.e0 = series.E.front();
  return env;
}

DecayEnvelope calibrate_general(const FeedbackLaw& law, const Series& series, double t_c,
                                std::optional<double> beta) {
  DecayEnvelope env;
  env.kind = transform::EnvelopeKind::general;
  env.law = law;
  env.beta = resolve_beta(law, series, beta);
  const double z = energy_at(series, t_c) / (2.0 * env.beta);
  env.M = t_c / transform::psi0_eval(law, 1.0 / transform::inverse_L(law, z));
  env.e0 = series.E.front();
  return env;
}

DecayEnvelope calibrate_lower(const FeedbackLaw& law, const Series& series, double t_c,
                              double gamma_s, double T0) {
  if (!(t_c > T0)) throw DomainError("calibrate_lower: calibration time must exceed T0");
  const double c = feedback::eval_H_prime(law, law.h_max());
  if (!(1.0 / (t_c - T0) <= c)) {
    throw DomainError("calibrate_lower: t_c - T0 shorter than 1/H'(r0^2)");
  }
  DecayEnvelope env;
  env.kind = transform::EnvelopeKind::lower;
  env.law = law;
  env.T0 = T0;
  env.T1 = t_c - T0;
  env.gamma_s = gamma_s;
  const double x = transform::inverse_H_prime(law, 1.0 / (t_c - T0));
  env.C_s = x / (gamma_s * std::sqrt(energy_at(series, t_c)));
  env.e0 = series.E.front();
  return env;
}

}  // namespace decaylab::harness
