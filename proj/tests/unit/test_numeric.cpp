#include <cmath>

#include <gtest/gtest.h>

#include "decaylab/errors.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/roots.hpp"

using namespace decaylab;

TEST(AdaptiveSimpson, IntegratesPolynomialsExactly) {
  const auto r = numeric::adaptive_simpson([](double x) { return 3 * x * x * x - x + 2; }, -1, 2);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 3.0 * 15.0 / 4.0 - 1.5 + 6.0, 1e-12);
}

TEST(AdaptiveSimpson, SmoothIntegrandsMeetRelativeTolerance) {
  const double v = numeric::integrate([](double x) { return std::exp(-x) * std::sin(5 * x); }, 0, 10);
  const double exact = (5.0 - std::exp(-10.0) * (std::sin(50.0) + 5.0 * std::cos(50.0))) / 26.0;
  EXPECT_NEAR(v, exact, 1e-10 * std::abs(exact));
}

TEST(AdaptiveSimpson, ReversedLimitsNegate) {
  auto f = [](double x) { return std::cos(x); };
  EXPECT_NEAR(numeric::integrate(f, 1, 0), -std::sin(1.0), 1e-12);
}

TEST(AdaptiveSimpson, EndpointSingularityNeedsManyIntervals) {
  const auto r = numeric::adaptive_simpson([](double x) { return 1.0 / std::sqrt(x + 1e-12); }, 0, 1);
  EXPECT_GT(r.intervals, 32u);
  EXPECT_NEAR(r.value, 2.0, 1e-5);
}

TEST(AdaptiveSimpson, IntervalCapIsReported) {
  numeric::SimpsonOptions opts;
  opts.max_intervals = 40;
  auto f = [](double x) { return std::sin(1.0 / (x + 1e-3)); };
  EXPECT_FALSE(numeric::adaptive_simpson(f, 0, 1, opts).converged);
  EXPECT_THROW(numeric::integrate(f, 0, 1, opts), ConvergenceError);
}

TEST(InvertIncreasing, FindsCubeRoot) {
  const double x = numeric::invert_increasing([](double x) { return x * x * x; }, 2.0, 0.0, 2.0);
  EXPECT_NEAR(x, std::cbrt(2.0), 1e-15);
}

TEST(InvertIncreasing, ClampsOutsideRange) {
  auto f = [](double x) { return x; };
  EXPECT_EQ(numeric::invert_increasing(f, 5.0, 0.0, 1.0), 1.0);
  EXPECT_EQ(numeric::invert_increasing(f, -5.0, 0.0, 1.0), 0.0);
}

TEST(InvertIncreasing, ResolvesTinyTargetsNearZero) {
  const double x = numeric::invert_increasing([](double x) { return x * x; }, 1e-200, 0.0, 1.0);
  EXPECT_NEAR(x / 1e-100, 1.0, 1e-12);
}

TEST(InvertIncreasing, UnboundedBracketGrows) {
  const double x = numeric::invert_increasing_unbounded([](double x) { return std::log1p(x); }, 20.0, 0.0, 1.0);
  EXPECT_NEAR(x, std::expm1(20.0), 1e-6 * std::expm1(20.0));
}

TEST(SafeguardedNewton, ConvergesOnMonotoneResidual) {
  auto f = [](double x) { return x + 0.5 * x * x * x - 1.0; };
  auto df = [](double x) { return 1.0 + 1.5 * x * x; };
  const auto r = numeric::safeguarded_newton(f, df, 0.0, 1.0, 0.0, 1e-14, 200);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(f(r.x), 0.0, 1e-13);
  EXPECT_LT(r.iterations, 20);
}

TEST(SafeguardedNewton, FallsBackToBisectionWhenNewtonOvershoots) {
  // atan has Newton iterates that diverge from far starting points.
  auto f = [](double x) { return std::atan(x - 0.3); };
  auto df = [](double x) { return 1.0 / (1.0 + (x - 0.3) * (x - 0.3)); };
  const auto r = numeric::safeguarded_newton(f, df, -20.0, 20.0, 19.0, 1e-13, 200);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.x, 0.3, 1e-12);
}

TEST(SafeguardedNewton, ReportsNonConvergence) {
  auto f = [](double x) { return x - 0.123456; };
  auto df = [](double) { return 0.0; };  // forces bisection
  const auto r = numeric::safeguarded_newton(f, df, 0.0, 1.0, 0.5, 1e-15, 5);
  EXPECT_FALSE(r.converged);
}
