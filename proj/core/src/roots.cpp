#include "decaylab/roots.hpp"

#include <cmath>
#include <string>

#include "decaylab/errors.hpp"

namespace decaylab::numeric {

double invert_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, const BisectionOptions& options) {
  if (!(lo <= hi)) throw DomainError("invert_increasing: empty bracket");
  if (f(hi) <= target) return hi;
  if (f(lo) >= target) return lo;

  // Pull a zero lower end up towards the root so that small roots keep
  // relative precision instead of stopping at an absolute width.
  if (lo == 0.0) {
    double probe = hi;
    for (int k = 0; k < 1100 && probe > 0.0; ++k) {
      const double next = 0.5 * probe;
      if (next == 0.0) break;
      if (f(next) <= target) {
        lo = next;
        hi = probe;
        break;
      }
      probe = next;
    }
  }

  for (int it = 0; it < options.max_iterations; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    if (options.abs_tol > 0.0 && hi - lo <= options.abs_tol) break;
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double invert_increasing_unbounded(const std::function<double(double)>& f,
                                   double target, double lo, double hi_guess,
                                   const BisectionOptions& options, int max_doublings) {
  double hi = std::max(hi_guess, lo + 1.0);
  int k = 0;
  while (f(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++k > max_doublings || !std::isfinite(hi)) {
      throw ConvergenceError("could not bracket target " + std::to_string(target));
    }
  }
  return invert_increasing(f, target, lo, hi, options);
}

}  // namespace decaylab::numeric
