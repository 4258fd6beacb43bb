#pragma once

#include <functional>

#include "decaylab/feedback.hpp"

namespace decaylab::transform {

using feedback::FeedbackLaw;

/// (H')^{-1}(y) for y in [0, H'(r0^2)], by bisection on [0, r0^2].
double inverse_H_prime(const FeedbackLaw& law, double y);

/// Convex conjugate of H restricted to [0, r0^2]:
/// sup_{0 <= x <= r0^2} (x y - H(x)).
double conjugate(const FeedbackLaw& law, double y);

/// L(y) = conj(y) / y, L(0) = 0. Increasing from [0, inf) onto [0, r0^2).
double eval_L(const FeedbackLaw& law, double y);

/// Unique y >= 0 with L(y) = z, for z in [0, r0^2).
double inverse_L(const FeedbackLaw& law, double z);

/// psi_0(x) for x >= 1/H'(r0^2). Requires a law away from linear growth.
double psi0_eval(const FeedbackLaw& law, double x);

/// Unique x with psi_0(x) = tau.
double psi0_inverse(const FeedbackLaw& law, double tau);

enum class EnvelopeKind { general, simplified, poly, expo, lower };

/// Calibrated decay bound. Which fields matter depends on `kind`:
///   general     2 beta L(1 / psi_0^{-1}(t/M)),           t >= M / H'(r0^2)
///   simplified  2 beta (H')^{-1}(kappa M / t)
///   poly        e0 min(1, (M(a+1) / (M + a e0^a t))^{1/a}),  a = alpha
///   expo        e0 exp(1 - t/M),                          t >= M
///   lower       (gamma_s C_s)^{-2} ((H')^{-1}(1/(t - T0)))^2, t >= T0 + T1
struct DecayEnvelope {
  EnvelopeKind kind = EnvelopeKind::general;
  FeedbackLaw law;
  double beta = 1.0;
  double M = 1.0;
  double kappa = 1.0;
  double T0 = 0.0;
  double T1 = 0.0;
  double gamma_s = 1.0;
  double C_s = 1.0;
  double e0 = 1.0;
  double alpha = 1.0;
};

/// Smallest t at which the envelope is defined.
double envelope_domain_start(const DecayEnvelope& env);

double envelope_general(const DecayEnvelope& env, double t);
double envelope_simplified(const DecayEnvelope& env, double t);
double envelope_poly(const DecayEnvelope& env, double t);
double envelope_expo(const DecayEnvelope& env, double t);

/// beta = E(0) / (2 L(H'(r0^2))), the smallest admissible value.
double minimal_beta(const FeedbackLaw& law, double e0);

enum class WeightMode { optimal, polynomial };

/// phi = L^{-1}(E / 2 beta) (optimal), or E^{(p-1)/2} (polynomial, power laws).
double optimal_weight(const FeedbackLaw& law, double energy, double beta,
                      WeightMode mode = WeightMode::optimal);

/// General weight w, strictly increasing from [0, eta) onto [0, inf), with
/// the maps
///   K_r(tau)  = int_tau^r dy / (y w(y))
///   psi_r(z)  = z + K_r(w^{-1}(1/z)),    z >= 1/w(r)
class GeneralWeight {
 public:
  GeneralWeight(std::function<double(double)> w, double r);

  double r() const { return r_; }
  double w(double y) const { return w_(y); }
  double w_inverse(double v) const;
  double K(double tau) const;
  double psi(double z) const;
  double psi_inverse(double value) const;
  /// Decay bound w^{-1}(1 / psi_r^{-1}(t/M)), defined for t >= M / w(r).
  double decay_bound(double t, double M) const;

 private:
  std::function<double(double)> w_;
  double r_;
};

enum class PsiMode { K, psi };

/// K_r(tau) or psi_r(z) for weight w.
double weight_psi_r(const std::function<double(double)>& w, double r, double z_or_tau,
                    PsiMode mode);

}  // namespace decaylab::transform
