#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

namespace decaylab::numeric {

struct BisectionOptions {
  /// Stop once the bracket is narrower than this. Zero means "until the
  /// two ends are adjacent doubles".
  double abs_tol = 0.0;
  int max_iterations = 2000;
};

/// Solve f(x) = target for nondecreasing f on [lo, hi] by bisection.
/// Requires f(lo) <= target <= f(hi); returns the midpoint of the final
/// bracket. When lo == 0 the lower end is first pulled up geometrically so
/// roots close to zero come back with full relative precision.
double invert_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, const BisectionOptions& options = {});

/// Like invert_increasing, but grows the upper end (doubling) until
/// f(hi) >= target. Throws ConvergenceError if no bracket is found after
/// `max_doublings`.
double invert_increasing_unbounded(const std::function<double(double)>& f,
                                   double target, double lo, double hi_guess,
                                   const BisectionOptions& options = {},
                                   int max_doublings = 2000);

struct ScalarRoot {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton iteration kept inside a sign-change bracket [lo, hi] of an
/// increasing function; falls back to bisection whenever a Newton step
/// leaves the bracket. Converged once |step| <= abs_tol or f hits zero.
template <class F, class DF>
ScalarRoot safeguarded_newton(F&& f, DF&& df, double lo, double hi, double x0,
                              double abs_tol, int max_iterations) {
  ScalarRoot root;
  double x = std::clamp(x0, lo, hi);
  for (int it = 1; it <= max_iterations; ++it) {
    const double fx = f(x);
    root.x = x;
    root.residual = fx;
    root.iterations = it;
    if (fx == 0.0) {
      root.converged = true;
      return root;
    }
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double slope = df(x);
    double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= abs_tol || hi - lo <= abs_tol) {
      root.x = next;
      root.residual = f(next);
      root.converged = true;
      return root;
    }
    x = next;
  }
  return root;
}

}  // namespace decaylab::numeric
