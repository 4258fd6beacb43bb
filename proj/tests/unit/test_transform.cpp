#include <cmath>

#include <gtest/gtest.h>

#include "decaylab/errors.hpp"
#include "decaylab/feedback.hpp"
#include "decaylab/transform.hpp"
#include "oracles.hpp"

using namespace decaylab;
using namespace decaylab::transform;
using feedback::Family;
using feedback::FeedbackLaw;

namespace {

FeedbackLaw power(double p) { return feedback::make_feedback(Family::power, {p, 0.0}, 1.0); }

std::vector<FeedbackLaw> convex_laws() {
  return {power(3), power(5), power(2), feedback::make_feedback(Family::exp_inv_square, {}),
          feedback::make_feedback(Family::power_log, {3.0, 2.0}),
          feedback::make_feedback(Family::sub_exponential, {3.0, 0.0})};
}

DecayEnvelope general(double beta, double M) {
  DecayEnvelope env;
  env.kind = EnvelopeKind::general;
  env.law = power(3);
  env.beta = beta;
  env.M = M;
  return env;
}

}  // namespace

TEST(Conjugate, MatchesGridSupremum) {
  auto H = [](double x) { return x * x; };
  EXPECT_NEAR(conjugate(power(3), 1.0), oracle::grid_sup_conjugate(H, 1.0, 1.0), 1e-12);
  EXPECT_NEAR(conjugate(power(3), 1.0), 0.25, 1e-12);
  EXPECT_NEAR(conjugate(power(3), 4.0), oracle::grid_sup_conjugate(H, 1.0, 4.0), 1e-12);
  EXPECT_NEAR(conjugate(power(3), 4.0), 3.0, 1e-12);
  EXPECT_EQ(conjugate(power(3), 0.0), 0.0);
  EXPECT_THROW(conjugate(power(3), -1.0), DomainError);
}

TEST(Conjugate, GridSupremumAcrossFamilies) {
  for (const auto& law : convex_laws()) {
    auto H = [&](double x) { return feedback::eval_H(law, x); };
    const double c = feedback::eval_H_prime(law, law.h_max());
    for (double frac : {0.1, 0.5, 0.9, 1.5}) {
      const double y = frac * c;
      EXPECT_NEAR(conjugate(law, y), oracle::grid_sup_conjugate(H, law.h_max(), y, 200000),
                  1e-9 * (1.0 + y)) << law.describe() << " y=" << y;
    }
  }
}

TEST(EvalL, Examples) {
  EXPECT_NEAR(eval_L(power(3), 1.0), 0.25, 1e-12);
  EXPECT_EQ(eval_L(power(3), 0.0), 0.0);
  const double edge = eval_L(power(3), 2.0);
  EXPECT_NEAR(edge, 0.5, 1e-12);
  EXPECT_GT(edge, 0.0);
  EXPECT_LT(edge, 1.0);
  EXPECT_THROW(eval_L(power(3), -0.5), DomainError);
}

TEST(EvalL, EdgeBracketForEveryConvexLaw) {
  for (const auto& law : convex_laws()) {
    const double v = eval_L(law, feedback::eval_H_prime(law, law.h_max()));
    EXPECT_GT(v, 0.0) << law.describe();
    EXPECT_LT(v, law.h_max()) << law.describe();
  }
}

TEST(InverseL, Examples) {
  EXPECT_NEAR(inverse_L(power(3), 0.25), 1.0, 1e-12);
  EXPECT_EQ(inverse_L(power(3), 0.0), 0.0);
  const double y = inverse_L(power(3), 0.9999);
  EXPECT_TRUE(std::isfinite(y));
  EXPECT_GT(y, 100.0);
  EXPECT_NEAR(eval_L(power(3), y), 0.9999, 1e-10);
  EXPECT_THROW(inverse_L(power(3), 1.0), DomainError);
}

TEST(InverseL, RoundTripOnGrid) {
  for (const auto& law : convex_laws()) {
    const double c = feedback::eval_H_prime(law, law.h_max());
    for (int i = 1; i <= 100; ++i) {
      const double y = 2.0 * c * i / 100.0;
      ASSERT_NEAR(inverse_L(law, eval_L(law, y)), y, 1e-9 * std::max(1.0, y)) << law.describe();
    }
  }
}

TEST(EvalL, StrictlyIncreasingIntoRange) {
  for (const auto& law : convex_laws()) {
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double v = eval_L(law, 0.05 * i);
      ASSERT_GT(v, prev);
      ASSERT_LT(v, law.h_max());
      prev = v;
    }
  }
}

TEST(Psi0, ClosedFormForPowerLaws) {
  EXPECT_NEAR(psi0_eval(power(3), 1.0), 1.5, 1e-10);
  EXPECT_NEAR(psi0_eval(power(3), 0.5), 0.5, 1e-14);
  EXPECT_NEAR(psi0_eval(power(5), 2.0), 1.0 / 3.0 + 1.5 * (2.0 - 1.0 / 3.0), 1e-9);
  EXPECT_THROW(psi0_eval(power(3), 0.4), DomainError);
  EXPECT_THROW(psi0_eval(feedback::make_feedback(Family::linear, {}), 2.0), ClassificationError);
}

TEST(Psi0, QuadratureOracleForExpInvSquare) {
  const auto law = feedback::make_feedback(Family::exp_inv_square, {});
  const double c = feedback::eval_H_prime(law, law.h_max());
  // theta = H'(x): d theta = H''(x) dx, so the integral becomes
  // int_{x(1/x_arg)}^{r0^2} H''(x) / (H'(x)^2 (1 - Lambda(x))) dx.
  auto Hp = [](double x) { return std::exp(-1.0 / x) / std::sqrt(x) * (0.5 + 1.0 / x); };
  auto Hpp = [&](double x) {
    const double h = 1e-7 * x;
    return (Hp(x + h) - Hp(x - h)) / (2 * h);
  };
  auto Lam = [](double x) { return 1.0 / (0.5 + 1.0 / x); };
  for (double arg : {1.0 / c + 0.5, 2.0 / c, 10.0 / c}) {
    const double x_lo = oracle::bisect(Hp, 1.0 / arg, 1e-3, law.h_max());
    const double integral = oracle::simpson(
        [&](double x) { return Hpp(x) / (Hp(x) * Hp(x) * (1.0 - Lam(x))); }, x_lo, law.h_max(),
        200000);
    EXPECT_NEAR(psi0_eval(law, arg), 1.0 / c + integral, 1e-6 * arg) << arg;
  }
}

TEST(Psi0Inverse, Examples) {
  EXPECT_NEAR(psi0_inverse(power(3), 1.5), 1.0, 1e-9);
  EXPECT_NEAR(psi0_inverse(power(3), 0.5), 0.5, 1e-10);
  EXPECT_NEAR(psi0_inverse(power(3), 10.0), 5.25, 1e-9);
  EXPECT_THROW(psi0_inverse(power(3), 0.3), DomainError);
}

TEST(Psi0, StrictlyIncreasingAndInvertible) {
  for (const auto& law : convex_laws()) {
    const double x0 = 1.0 / feedback::eval_H_prime(law, law.h_max());
    double prev = -1.0;
    for (int i = 0; i < 20; ++i) {
      const double x = x0 * (1.0 + i * 0.7);
      const double v = psi0_eval(law, x);
      ASSERT_GT(v, prev);
      ASSERT_GE(v, x * (1 - 1e-12));
      ASSERT_NEAR(psi0_inverse(law, v), x, 1e-8 * std::max(1.0, x)) << law.describe();
      prev = v;
    }
  }
}

TEST(EnvelopeGeneral, Examples) {
  EXPECT_NEAR(envelope_general(general(1, 1), 10.0), 2.0 / 21.0, 1e-9);
  EXPECT_NEAR(envelope_general(general(1, 1), 0.5), 1.0, 1e-9);
  EXPECT_THROW(envelope_general(general(1, 1), 0.4), DomainError);
}

TEST(EnvelopeGeneral, AsymptoticSlopeForCubicFeedback) {
  const auto env = general(1, 1);
  const double t1 = 1e5, t2 = 1e6;
  const double slope = std::log(envelope_general(env, t2) / envelope_general(env, t1)) / std::log(10.0);
  EXPECT_NEAR(slope, -1.0, 1e-3);
}

TEST(EnvelopeSimplified, Examples) {
  DecayEnvelope env;
  env.kind = EnvelopeKind::simplified;
  env.law = power(3);
  env.beta = 1.0;
  env.M = 1.0;
  env.kappa = 1.0;
  EXPECT_NEAR(envelope_simplified(env, 10.0), 0.1, 1e-12);
  EXPECT_LT(envelope_simplified(env, 1e12), 1e-11);
  EXPECT_THROW(envelope_simplified(env, 0.1), DomainError);
  env.law = feedback::make_feedback(Family::linear, {});
  EXPECT_THROW(envelope_simplified(env, 10.0), ClassificationError);
}

TEST(EnvelopeSimplified, ClosedFormForPowerLaws) {
  oracle::Gen gen(3);
  for (int i = 0; i < 50; ++i) {
    DecayEnvelope env;
    env.kind = EnvelopeKind::simplified;
    const double p = gen.uniform(1.5, 8.0);
    env.law = power(p);
    env.beta = gen.uniform(0.1, 3.0);
    env.M = gen.uniform(0.1, 3.0);
    env.kappa = gen.uniform(0.5, 2.0);
    const double t = gen.log_uniform(env.kappa * env.M * 2, 1e6);
    const double exact =
        2 * env.beta * std::pow(2 * env.kappa * env.M / ((p + 1) * t), 2 / (p - 1));
    ASSERT_NEAR(envelope_simplified(env, t) / exact, 1.0, 1e-9) << "p=" << p << " t=" << t;
  }
}

TEST(Envelopes, RatioSimplifiedToGeneralIsBounded) {
  auto g = general(1, 1);
  DecayEnvelope s = g;
  s.kind = EnvelopeKind::simplified;
  double lo = INFINITY, hi = 0;
  for (double t = 10; t <= 1e4; t *= 1.5) {
    const double r = envelope_simplified(s, t) / envelope_general(g, t);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GT(lo, 0.2);
  EXPECT_LT(hi, 5.0);
}

TEST(Envelopes, NonincreasingOnDomain) {
  for (const auto& law : convex_laws()) {
    DecayEnvelope g;
    g.law = law;
    DecayEnvelope s = g;
    s.kind = EnvelopeKind::simplified;
    double pg = INFINITY, ps = INFINITY;
    const double start = envelope_domain_start(g) + 1.0;
    for (int i = 0; i < 30; ++i) {
      const double t = start * std::pow(1.6, i);
      const double vg = envelope_general(g, t);
      const double vs = envelope_simplified(s, t);
      ASSERT_LE(vg, pg * (1 + 1e-9)) << law.describe();
      ASSERT_LE(vs, ps) << law.describe();
      pg = vg;
      ps = vs;
    }
  }
}

TEST(OptimalWeight, Examples) {
  EXPECT_NEAR(optimal_weight(power(3), 0.5, 1.0), 1.0, 1e-12);
  EXPECT_EQ(optimal_weight(power(3), 0.0, 2.0), 0.0);
  EXPECT_NEAR(optimal_weight(power(3), 0.25, 1.0, WeightMode::polynomial), 0.25, 1e-15);
  EXPECT_THROW(optimal_weight(power(3), 3.0, 1.0), DomainError);
}

TEST(MinimalBeta, SaturatesEdgeOfL) {
  const double beta = minimal_beta(power(3), 0.8);
  EXPECT_NEAR(beta, 0.8, 1e-12);  // L(H'(1)) = 1/2
  EXPECT_NEAR(optimal_weight(power(3), 0.8, beta), 2.0, 1e-9);
}

TEST(WeightPsiR, Examples) {
  auto w = [](double y) { return y; };
  EXPECT_NEAR(weight_psi_r(w, 1.0, 0.5, PsiMode::K), 1.0, 1e-10);
  EXPECT_NEAR(weight_psi_r(w, 1.0, 1.0, PsiMode::psi), 1.0, 1e-10);
  EXPECT_NEAR(weight_psi_r(w, 1.0, 5.0, PsiMode::psi), 9.0, 1e-9);
  EXPECT_THROW(weight_psi_r(w, 1.0, 2.0, PsiMode::K), DomainError);
  EXPECT_THROW(weight_psi_r(w, 1.0, 0.5, PsiMode::psi), DomainError);
}

TEST(WeightPsiR, DominatesIdentity) {
  oracle::Gen gen(17);
  for (int i = 0; i < 30; ++i) {
    const double a = gen.uniform(0.3, 3.0);
    const double r = gen.uniform(0.2, 2.0);
    GeneralWeight weight([a](double y) { return std::pow(y, a); }, r);
    const double z = (1.0 / weight.w(r)) * gen.uniform(1.0, 50.0);
    const double v = weight.psi(z);
    ASSERT_GE(v, z);
    // int_tau^r y^{-1-a} dy with tau^{-a} = z.
    const double K_oracle = (z - 1.0 / weight.w(r)) / a;
    ASSERT_NEAR(v, z + K_oracle, 1e-6 * v);
    ASSERT_NEAR(weight.psi_inverse(v), z, 1e-8 * z);
  }
}
