#include "decaylab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "decaylab/errors.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/roots.hpp"

namespace decaylab::transform {

using feedback::eval_H;
using feedback::eval_H_prime;
using feedback::lambda_H;

namespace {

constexpr double kEdgeSlack = 1e-12;

double h_prime_edge(const FeedbackLaw& law) { return eval_H_prime(law, law.h_max()); }

void require_away_from_linear(const FeedbackLaw& law, const char* op) {
  if (!feedback::is_away_from_linear(law)) {
    throw ClassificationError(std::string(op) + ": " + law.describe() +
                              " has limsup Lambda_H = 1 (growth close to linear)");
  }
}

// Integral part of psi_0 after the substitution u = 1/theta:
//   int_{1/c}^{x} du / (1 - Lambda_H((H')^{-1}(1/u))).
double psi0_unchecked(const FeedbackLaw& law, double x) {
  const double c = h_prime_edge(law);
  const double start = 1.0 / c;
  if (x <= start) return start;
  auto integrand = [&](double u) {
    const double y = std::min(1.0 / u, c);
    const double arg = inverse_H_prime(law, y);
    if (arg <= 0.0) return 1.0 / (1.0 - feedback::lambda_limit(law).limsup);
    return 1.0 / (1.0 - lambda_H(law, arg));
  };
  numeric::SimpsonOptions opts;
  opts.rel_tol = 1e-10;
  return start + numeric::integrate(integrand, start, x, opts);
}

}  // namespace

double inverse_H_prime(const FeedbackLaw& law, double y) {
  const double c = h_prime_edge(law);
  if (!(y >= 0.0) || y > c * (1.0 + kEdgeSlack)) {
    throw DomainError("(H')^{-1}: y = " + std::to_string(y) + " outside [0, H'(r0^2)]");
  }
  if (y >= c) return law.h_max();
  return numeric::invert_increasing([&](double x) { return eval_H_prime(law, x); }, y, 0.0,
                                    law.h_max());
}

double conjugate(const FeedbackLaw& law, double y) {
  if (!(y >= 0.0)) throw DomainError("conjugate: y must be >= 0");
  const double c = h_prime_edge(law);
  if (y <= c) {
    const double x = inverse_H_prime(law, y);
    if (x <= 0.0) return 0.0;
    // y x - H(x) with H(x) = Lambda_H(x) x H'(x) and H'(x) = y.
    return y * x * (1.0 - lambda_H(law, x));
  }
  return y * law.h_max() - eval_H(law, law.h_max());
}

double eval_L(const FeedbackLaw& law, double y) {
  if (!(y >= 0.0)) throw DomainError("eval_L: y must be >= 0");
  if (y == 0.0) return 0.0;
  const double c = h_prime_edge(law);
  if (y <= c) {
    const double x = inverse_H_prime(law, y);
    return x <= 0.0 ? 0.0 : x * (1.0 - lambda_H(law, x));
  }
  return law.h_max() - eval_H(law, law.h_max()) / y;
}

double inverse_L(const FeedbackLaw& law, double z) {
  if (!(z >= 0.0) || z >= law.h_max()) {
    throw DomainError("inverse_L: z = " + std::to_string(z) + " outside [0, r0^2)");
  }
  if (z == 0.0) return 0.0;
  const double c = h_prime_edge(law);
  const double z_edge = eval_L(law, c);
  if (z <= z_edge) {
    // Interior branch: L(H'(x)) = x (1 - Lambda_H(x)) is increasing in x.
    const double x = numeric::invert_increasing(
        [&](double s) { return s <= 0.0 ? 0.0 : s * (1.0 - lambda_H(law, s)); }, z, 0.0,
        law.h_max());
    return eval_H_prime(law, x);
  }
  return numeric::invert_increasing_unbounded([&](double y) { return eval_L(law, y); }, z, c,
                                              2.0 * c);
}

double psi0_eval(const FeedbackLaw& law, double x) {
  const double c = h_prime_edge(law);
  if (!(x >= (1.0 - kEdgeSlack) / c)) {
    throw DomainError("psi0_eval: x = " + std::to_string(x) + " below 1/H'(r0^2)");
  }
  require_away_from_linear(law, "psi0_eval");
  return psi0_unchecked(law, x);
}

double psi0_inverse(const FeedbackLaw& law, double tau) {
  const double start = 1.0 / h_prime_edge(law);
  if (!(tau >= start * (1.0 - kEdgeSlack))) {
    throw DomainError("psi0_inverse: tau = " + std::to_string(tau) + " below 1/H'(r0^2)");
  }
  require_away_from_linear(law, "psi0_inverse");
  if (tau <= start) return start;
  // psi_0(x) >= x, so the root lies in [start, tau].
  numeric::BisectionOptions opts;
  opts.abs_tol = 1e-10;
  return numeric::invert_increasing([&](double x) { return psi0_unchecked(law, x); }, tau,
                                    start, tau, opts);
}

double envelope_domain_start(const DecayEnvelope& env) {
  const double c = h_prime_edge(env.law);
  switch (env.kind) {
    case EnvelopeKind::general:
      return env.M / c;
    case EnvelopeKind::simplified:
      return env.kappa * env.M / c;
    case EnvelopeKind::poly:
      return 0.0;
    case EnvelopeKind::expo:
      return env.M;
    case EnvelopeKind::lower:
      return env.T0 + std::max(env.T1, 1.0 / c);
  }
  return 0.0;
}

double envelope_general(const DecayEnvelope& env, double t) {
  const double start = envelope_domain_start({EnvelopeKind::general, env.law, env.beta, env.M});
  if (!(t >= start * (1.0 - kEdgeSlack))) {
    throw DomainError("envelope_general: t = " + std::to_string(t) + " below M/H'(r0^2)");
  }
  const double x = psi0_inverse(env.law, std::max(t / env.M, 1.0 / h_prime_edge(env.law)));
  return 2.0 * env.beta * eval_L(env.law, 1.0 / x);
}

double envelope_simplified(const DecayEnvelope& env, double t) {
  require_away_from_linear(env.law, "envelope_simplified");
  if (!(t > 0.0)) throw DomainError("envelope_simplified: t must be positive");
  const double s = env.kappa * env.M / t;
  if (s > h_prime_edge(env.law) * (1.0 + kEdgeSlack)) {
    throw DomainError("envelope_simplified: t = " + std::to_string(t) +
                      " too small (kappa M / t exceeds H'(r0^2))");
  }
  return 2.0 * env.beta * inverse_H_prime(env.law, std::min(s, h_prime_edge(env.law)));
}

double envelope_poly(const DecayEnvelope& env, double t) {
  if (!(t >= 0.0)) throw DomainError("envelope_poly: t must be >= 0");
  const double a = env.alpha;
  const double ratio = env.M * (a + 1.0) / (env.M + a * std::pow(env.e0, a) * t);
  return env.e0 * std::min(1.0, std::pow(ratio, 1.0 / a));
}

double envelope_expo(const DecayEnvelope& env, double t) {
  if (!(t >= env.M)) throw DomainError("envelope_expo: t must be >= T");
  return env.e0 * std::exp(1.0 - t / env.M);
}

double minimal_beta(const FeedbackLaw& law, double e0) {
  return e0 / (2.0 * eval_L(law, h_prime_edge(law)));
}

double optimal_weight(const FeedbackLaw& law, double energy, double beta, WeightMode mode) {
  if (!(energy >= 0.0)) throw DomainError("optimal_weight: energy must be >= 0");
  if (mode == WeightMode::polynomial) {
    if (law.family != feedback::Family::power) {
      throw ClassificationError("polynomial weight needs a power law, got " + law.describe());
    }
    return std::pow(energy, 0.5 * (law.params.p - 1.0));
  }
  if (!(beta > 0.0)) throw DomainError("optimal_weight: beta must be positive");
  return inverse_L(law, energy / (2.0 * beta));
}

// ---------------------------------------------------------------------------

GeneralWeight::GeneralWeight(std::function<double(double)> w, double r)
    : w_(std::move(w)), r_(r) {
  if (!(r_ > 0.0)) throw DomainError("GeneralWeight: r must be positive");
  if (!(w_(r_) > 0.0)) throw DomainError("GeneralWeight: w(r) must be positive");
}

double GeneralWeight::w_inverse(double v) const {
  if (!(v >= 0.0)) throw DomainError("w_inverse: value must be >= 0");
  if (v <= w_(r_)) return numeric::invert_increasing(w_, v, 0.0, r_);
  return numeric::invert_increasing_unbounded(w_, v, r_, 2.0 * r_);
}

double GeneralWeight::K(double tau) const {
  if (!(tau > 0.0 && tau <= r_)) throw DomainError("K_r: tau outside (0, r]");
  // y = e^s turns dy / (y w(y)) into ds / w(e^s).
  return numeric::integrate([&](double s) { return 1.0 / w_(std::exp(s)); }, std::log(tau),
                            std::log(r_));
}

double GeneralWeight::psi(double z) const {
  const double start = 1.0 / w_(r_);
  if (!(z >= start * (1.0 - kEdgeSlack))) throw DomainError("psi_r: z below 1/w(r)");
  if (z <= start) return start;
  return z + K(std::min(w_inverse(1.0 / z), r_));
}

double GeneralWeight::psi_inverse(double value) const {
  const double start = 1.0 / w_(r_);
  if (!(value >= start * (1.0 - kEdgeSlack))) throw DomainError("psi_r^{-1}: value below 1/w(r)");
  if (value <= start) return start;
  return numeric::invert_increasing([&](double z) { return psi(z); }, value, start, value);
}

double GeneralWeight::decay_bound(double t, double M) const {
  if (!(t >= M / w_(r_) * (1.0 - kEdgeSlack))) throw DomainError("decay bound: t below M/w(r)");
  return w_inverse(1.0 / psi_inverse(std::max(t / M, 1.0 / w_(r_))));
}

double weight_psi_r(const std::function<double(double)>& w, double r, double z_or_tau,
                    PsiMode mode) {
  const GeneralWeight weight(w, r);
  return mode == PsiMode::K ? weight.K(z_or_tau) : weight.psi(z_or_tau);
}

}  // namespace decaylab::transform
