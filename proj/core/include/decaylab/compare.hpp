#pragma once

#include <optional>
#include <vector>

#include "decaylab/feedback.hpp"
#include "decaylab/transform.hpp"
#include "decaylab/wave.hpp"

namespace decaylab::compare {

using feedback::FeedbackLaw;

struct ComparisonSample {
  double t = 0.0;
  double z = 0.0;
};

/// Solution of z' + kappa H(z) = 0, z(0) = z0, sampled at requested times.
struct ComparisonSolution {
  FeedbackLaw law;
  double kappa = 1.0;
  double z0 = 0.0;
  std::vector<ComparisonSample> samples;
  int accepted_steps = 0;
  int rejected_steps = 0;
};

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_steps = 1'000'000;
};

/// Adaptive Dormand-Prince 5(4) integration, reported at `times` (sorted,
/// nonnegative). Steps that would make z nonpositive are rejected.
ComparisonSolution solve_comparison(const FeedbackLaw& law, double kappa, double z0,
                                    const std::vector<double>& times,
                                    const OdeOptions& options = {});

/// Convenience overload: `points` samples evenly spaced on [0, horizon].
ComparisonSolution solve_comparison(const FeedbackLaw& law, double kappa, double z0,
                                    double horizon, int points = 101,
                                    const OdeOptions& options = {});

/// K(tau) = int_tau^{z0} dy / H(y), 0 < tau <= z0 <= r0^2.
double K_integral(const FeedbackLaw& law, double tau, double z0);

/// Unique tau in (0, z0] with K(tau) = value (value >= 0).
double K_inverse(const FeedbackLaw& law, double value, double z0);

/// (gamma_s C_s)^{-2} ((H')^{-1}(1/(t - T0)))^2 for t >= T0 + T1.
double lower_envelope(const transform::DecayEnvelope& env, double t);

/// Screening of the lower-bound hypothesis on Lambda_H.
struct LowerScreening {
  bool passes = false;
  bool ratio_alternative = false;  // 0 < liminf <= limsup < 1
  bool integral_alternative = false;
  double liminf = 0.0;
  double limsup = 0.0;
  double integral_liminf = 0.0;
};

/// Either 0 < liminf Lambda_H <= limsup Lambda_H < 1, or limsup < 1 and
/// liminf_{x->0} H(mu x)/(mu x) int_x^{z1} dy/H(y) > 0 (mu = 2, z1 = z0).
LowerScreening screen_lower_hypothesis(const FeedbackLaw& law, double z0, double mu = 2.0);

/// gamma_s = 4 sqrt(E1(0)).
double gamma_s(double e1_initial);

/// First sample time with E <= (r0^2 / gamma_s)^2, if any.
std::optional<double> estimate_T0(const wave::EnergyTrace& trace, const FeedbackLaw& law,
                                  double gamma);

}  // namespace decaylab::compare
