#pragma once

#include <cstddef>
#include <functional>

namespace decaylab::numeric {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t intervals = 0;
  bool converged = true;
};

struct SimpsonOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 1'000'000;
  int max_depth = 60;
};

/// Adaptive Simpson quadrature with interval bisection and Richardson
/// correction. The tolerance scale is taken from a 32-panel composite pass,
/// so the rule is relative to the magnitude of the whole integral.
/// Reversed limits (b < a) return the negated integral.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b,
                                  const SimpsonOptions& options = {});

/// Same as adaptive_simpson but throws ConvergenceError when the interval
/// budget runs out, and returns only the value.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const SimpsonOptions& options = {});

}  // namespace decaylab::numeric
