#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "decaylab/compare.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/harness.hpp"

namespace decaylab::harness {

namespace {

using feedback::Family;

std::vector<FeedbackLaw> battery_laws() {
  return {
      feedback::make_feedback(Family::power, {3.0, 0.0}),
      feedback::make_feedback(Family::power, {5.0, 0.0}),
      feedback::make_feedback(Family::power, {2.0, 0.0}),
      feedback::make_feedback(Family::exp_inv_square, {}),
      feedback::make_feedback(Family::power_log, {3.0, 2.0}),
      feedback::make_feedback(Family::sub_exponential, {3.0, 0.0}),
  };
}

class Recorder {
 public:
  explicit Recorder(std::vector<Assertion>& out) : out_(out) {}
  void add(const std::string& name, bool ok, const std::string& detail) {
    out_.push_back({name, ok, detail});
  }

 private:
  std::vector<Assertion>& out_;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

wave::SimulationConfig short_run(bool damped, bool coupled) {
  wave::SimulationConfig cfg;
  cfg.law = feedback::make_feedback(Family::power, {3.0, 0.0});
  cfg.n = 49;
  cfg.t_final = 5.0;
  cfg.sample_dt = 0.5;
  if (damped) cfg.damping = {feedback::Profile::indicator, 0.2, 0.6, 1.0, 1.0};
  if (coupled) cfg.alpha = {feedback::Profile::indicator, 0.4, 0.9, 0.2, 0.2};
  cfg.u0 = {wave::InitialShape::sine, 0.2, 1};
  cfg.v0 = {wave::InitialShape::sine, 0.1, 2};
  return cfg;
}

}  // namespace

std::vector<Assertion> invariant_batteries(std::uint64_t seed) {
  std::vector<Assertion> out;
  Recorder rec(out);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto laws = battery_laws();

  // Lambda_H stays in (0, 1] and the laws are strictly convex.
  for (const auto& law : laws) {
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double x = law.h_max() * std::pow(10.0, -12.0 * unit(rng));
      const double v = feedback::lambda_H(law, x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rec.add("lambda_range " + law.describe(), lo > 0.0 && hi <= 1.0 + 1e-12,
            "[" + num(lo) + ", " + num(hi) + "]");
    const auto convex = feedback::convexity_check(law);
    rec.add("convex " + law.describe(), convex.strictly_convex && convex.h0_ok && convex.hprime0_ok,
            "min second difference " + num(convex.min_second_difference));
  }

  // Fenchel inequality and L^{-1}(L(y)) = y.
  for (const auto& law : laws) {
    const double c = feedback::eval_H_prime(law, law.h_max());
    double worst_fenchel = 0.0, worst_inverse = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = law.h_max() * unit(rng);
      const double y = 2.0 * c * std::max(unit(rng), 1e-6);
      const double gap = transform::conjugate(law, y) + feedback::eval_H(law, x) - x * y;
      worst_fenchel = std::min(worst_fenchel, gap / (1.0 + x * y));
      const double y2 = c * std::pow(10.0, -6.0 * unit(rng));
      const double back = transform::inverse_L(law, transform::eval_L(law, y2));
      worst_inverse = std::max(worst_inverse, std::abs(back - y2) / y2);
    }
    rec.add("fenchel " + law.describe(), worst_fenchel >= -1e-12, "min gap " + num(worst_fenchel));
    rec.add("L_inverse_roundtrip " + law.describe(), worst_inverse <= 1e-9,
            "max relative error " + num(worst_inverse));
  }

  // psi_0(x) >= x on its domain.
  for (const auto& law : laws) {
    if (!feedback::is_away_from_linear(law)) continue;
    const double x0 = 1.0 / feedback::eval_H_prime(law, law.h_max());
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
      const double x = x0 * (1.0 + 100.0 * unit(rng));
      ok = ok && transform::psi0_eval(law, x) >= x * (1.0 - 1e-12);
    }
    rec.add("psi0_dominates_identity " + law.describe(), ok, "20 random points");
  }

  // Exact power laws are recovered to three decimals.
  {
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double k = -3.0 * unit(rng) - 0.1;
      const double scale = std::pow(10.0, 8.0 * unit(rng) - 4.0);
      const auto s = sample_function([&](double t) { return scale * std::pow(t, k); }, 10.0,
                                     1000.0, 200);
      const auto fit = fit_tail_exponent(s, {10.0, 1000.0});
      worst = std::max(worst, std::abs(fit.slope - k));
    }
    rec.add("fit_recovers_power_law", worst < 5e-4, "max slope error " + num(worst));
  }

  // The measured M, inflated by 1e-9, passes at every start point.
  {
    bool ok = true;
    for (int i = 0; i < 25; ++i) {
      Series s;
      double e = 1.0 + 9.0 * unit(rng);
      for (int j = 0; j < 300; ++j) {
        s.t.push_back(0.5 * j);
        s.E.push_back(e);
        e *= 1.0 - 0.05 * unit(rng);
      }
      const double a = 2.0 * unit(rng);
      const Weight w = [a](double y) { return std::pow(y, a); };
      const auto first = check_integral_inequality(s, w);
      const auto again = check_integral_inequality(s, w, first.M * (1.0 + 1e-9));
      ok = ok && again.passed && again.ratios.size() == 50;
    }
    rec.add("inequality_recheck_passes", ok, "25 random nonincreasing traces");
  }

  // Comparison ODE stays positive and decreasing.
  for (const auto& law : laws) {
    const auto sol = compare::solve_comparison(law, 1.0, law.h_max(), 100.0, 51);
    bool ok = true;
    for (std::size_t i = 1; i < sol.samples.size(); ++i) {
      ok = ok && sol.samples[i].z > 0.0 && sol.samples[i].z <= sol.samples[i - 1].z;
    }
    rec.add("comparison_decreasing " + law.describe(), ok, num(sol.samples.back().z));
  }

  // Short simulations.
  {
    const auto plain = wave::run(short_run(false, false));
    rec.add("undamped_conservation", plain.meta.max_drift <= 1e-10,
            "drift " + num(plain.meta.max_drift));
    const auto coupled = wave::run(short_run(false, true));
    rec.add("coupled_conservation", coupled.meta.max_drift <= 1e-10,
            "drift " + num(coupled.meta.max_drift));
    const auto damped = wave::run(short_run(true, true));
    rec.add("damped_monotone", damped.meta.max_step_increase <= 1e-11,
            "max increase " + num(damped.meta.max_step_increase));

    auto state = wave::init_state(short_run(false, false));
    const auto start = state.u_curr;
    for (int i = 0; i < 200; ++i) wave::step(state);
    auto back = wave::reversed(state);
    for (int i = 0; i < 200; ++i) wave::step(back);
    double err = 0.0;
    for (std::size_t j = 0; j < start.size(); ++j) {
      err = std::max(err, std::abs(back.u_prev[j] - start[j]));
    }
    rec.add("undamped_time_reversible", err <= 1e-10, "max deviation " + num(err));
  }
  return out;
}

}  // namespace decaylab::harness
