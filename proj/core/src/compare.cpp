#include "decaylab/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "decaylab/errors.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/roots.hpp"

namespace decaylab::compare {

namespace odeint = boost::numeric::odeint;
using feedback::eval_H;

ComparisonSolution solve_comparison(const FeedbackLaw& law, double kappa, double z0,
                                    const std::vector<double>& times,
                                    const OdeOptions& options) {
  if (!(kappa > 0.0)) throw DomainError("solve_comparison: kappa must be positive");
  if (!(z0 > 0.0 && z0 <= law.h_max())) {
    throw DomainError("solve_comparison: z0 must lie in (0, r0^2]");
  }
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw DomainError("solve_comparison: output times must be sorted and nonnegative");
  }

  ComparisonSolution sol;
  sol.law = law;
  sol.kappa = kappa;
  sol.z0 = z0;

  using State = double;
  auto rhs = [&](const State& z, State& dzdt, double /*t*/) {
    dzdt = -kappa * eval_H(law, std::clamp(z, 0.0, law.h_max()));
  };
  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                         odeint::runge_kutta_dopri5<State>());

  State z = z0;
  double t = 0.0;
  // Start at a small fraction of the initial decay time z0 / (kappa H(z0)).
  double dt = 1e-3 * z0 / (kappa * std::max(eval_H(law, z0), 1e-300));
  int steps = 0;
  for (double target : times) {
    while (t < target) {
      if (++steps > options.max_steps) {
        throw ConvergenceError("solve_comparison: step budget exhausted at t = " +
                               std::to_string(t));
      }
      double step = std::min(dt, target - t);
      const bool clipped = step < dt;
      State trial = z;
      double t_trial = t;
      double dt_trial = step;
      const auto result = stepper.try_step(rhs, trial, t_trial, dt_trial);
      if (result == odeint::fail || !(trial > 0.0)) {
        ++sol.rejected_steps;
        dt = (result == odeint::fail) ? dt_trial : 0.5 * step;
        continue;
      }
      ++sol.accepted_steps;
      z = trial;
      t = (t_trial >= target || target - t_trial < 1e-14 * std::max(1.0, target)) ? target
                                                                                    : t_trial;
      // Keep the unclipped step size proposal when the step was shortened to
      // land on an output time.
      if (!clipped) dt = dt_trial;
    }
    sol.samples.push_back({target, z});
  }
  return sol;
}

ComparisonSolution solve_comparison(const FeedbackLaw& law, double kappa, double z0,
                                    double horizon, int points, const OdeOptions& options) {
  if (!(horizon >= 0.0) || points < 2) throw DomainError("solve_comparison: bad sampling");
  std::vector<double> times(points);
  for (int i = 0; i < points; ++i) times[i] = horizon * i / (points - 1);
  return solve_comparison(law, kappa, z0, times, options);
}

double K_integral(const FeedbackLaw& law, double tau, double z0) {
  if (!(z0 > 0.0 && z0 <= law.h_max()) || !(tau > 0.0 && tau <= z0)) {
    throw DomainError("K_integral: need 0 < tau <= z0 <= r0^2");
  }
  if (tau == z0) return 0.0;
  // y = e^s: int ds y / H(y) = int ds exp(s - log H(e^s)).
  auto integrand = [&](double s) {
    const double y = std::min(std::exp(s), law.h_max());
    return std::exp(s - feedback::log_H(law, y));
  };
  numeric::SimpsonOptions opts;
  opts.rel_tol = 1e-10;
  opts.max_intervals = 1'000'000;
  return numeric::integrate(integrand, std::log(tau), std::log(z0), opts);
}

double K_inverse(const FeedbackLaw& law, double value, double z0) {
  if (!(value >= 0.0)) throw DomainError("K_inverse: value must be >= 0");
  if (value == 0.0) return z0;
  // K decreases in tau; search on log tau for -K increasing.
  double lo = std::log(z0);
  while (K_integral(law, std::exp(lo), z0) < value) {
    lo -= 1.0;
    if (std::exp(lo) <= 1e-300) throw ConvergenceError("K_inverse: value beyond range");
  }
  const double hi = std::log(z0);
  const double s = numeric::invert_increasing(
      [&](double u) { return -K_integral(law, std::exp(u), z0); }, -value, lo, hi);
  return std::exp(s);
}

double lower_envelope(const transform::DecayEnvelope& env, double t) {
  if (env.kind != transform::EnvelopeKind::lower) {
    throw DomainError("lower_envelope: envelope kind must be lower");
  }
  if (!(t >= env.T0 + env.T1)) throw DomainError("lower_envelope: t below T0 + T1");
  const double c = feedback::eval_H_prime(env.law, env.law.h_max());
  const double arg = 1.0 / (t - env.T0);
  if (!(arg <= c)) {
    throw DomainError("lower_envelope: 1/(t - T0) exceeds H'(r0^2); t too close to T0");
  }
  const double x = transform::inverse_H_prime(env.law, arg);
  const double scale = env.gamma_s * env.C_s;
  return x * x / (scale * scale);
}

LowerScreening screen_lower_hypothesis(const FeedbackLaw& law, double z0, double mu) {
  LowerScreening out;
  const auto limits = feedback::lambda_limit(law);
  out.liminf = limits.liminf;
  out.limsup = limits.limsup;
  const bool below_one = limits.limsup < 1.0 - 1e-6;
  out.ratio_alternative = limits.liminf > 1e-12 && below_one;

  // H(mu x)/(mu x) int_x^{z1} dy/H(y), written with ratios H(mu x)/H(y) so
  // nothing overflows; the log substitution keeps the integrand smooth.
  const double z1 = std::min(z0, law.h_max());
  double worst = std::numeric_limits<double>::infinity();
  double x = z1 / mu;
  int taken = 0;
  std::vector<double> tail;
  for (int k = 0; k < 60 && x > 1e-300; ++k, x *= 0.5) {
    const double lhx = feedback::log_H(law, mu * x);
    auto integrand = [&](double s) {
      const double y = std::exp(s);
      return std::exp(lhx - feedback::log_H(law, y) + s);
    };
    numeric::SimpsonOptions opts;
    opts.rel_tol = 1e-6;
    const auto r = numeric::adaptive_simpson(integrand, std::log(x), std::log(z1), opts);
    tail.push_back(r.value / (mu * x));
    ++taken;
  }
  const auto first = tail.size() > 10 ? tail.end() - 10 : tail.begin();
  for (auto it = first; it != tail.end(); ++it) worst = std::min(worst, *it);
  out.integral_liminf = taken > 0 ? worst : 0.0;
  out.integral_alternative = below_one && out.integral_liminf > 1e-12;
  out.passes = out.ratio_alternative || out.integral_alternative;
  return out;
}

double gamma_s(double e1_initial) {
  if (!(e1_initial >= 0.0)) throw DomainError("gamma_s: E1(0) must be >= 0");
  return 4.0 * std::sqrt(e1_initial);
}

std::optional<double> estimate_T0(const wave::EnergyTrace& trace, const FeedbackLaw& law,
                                  double gamma) {
  const double threshold = std::pow(law.h_max() / gamma, 2);
  for (const auto& s : trace.samples) {
    if (s.E <= threshold) return s.t;
  }
  return std::nullopt;
}

}  // namespace decaylab::compare
