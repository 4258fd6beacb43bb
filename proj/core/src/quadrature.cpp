#include "decaylab/quadrature.hpp"

#include <cmath>
#include <vector>

#include "decaylab/errors.hpp"

namespace decaylab::numeric {

namespace {

struct Panel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
  double tol;
  int depth;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b,
                                  const SimpsonOptions& options) {
  QuadratureResult result;
  if (a == b) return result;
  if (b < a) {
    result = adaptive_simpson(f, b, a, options);
    result.value = -result.value;
    return result;
  }

  // Coarse composite pass: sets the tolerance scale and seeds the panels.
  constexpr int kSeedPanels = 32;
  const double h = (b - a) / kSeedPanels;
  std::vector<double> nodes(2 * kSeedPanels + 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = (i + 1 == nodes.size()) ? b : a + 0.5 * h * static_cast<double>(i);
    nodes[i] = f(x);
  }
  double scale = 0.0;
  std::vector<Panel> stack;
  stack.reserve(256);
  for (int k = 0; k < kSeedPanels; ++k) {
    const double pa = a + h * k;
    const double pb = (k + 1 == kSeedPanels) ? b : a + h * (k + 1);
    const double fa = nodes[2 * k], fm = nodes[2 * k + 1], fb = nodes[2 * k + 2];
    const double s = simpson(pa, pb, fa, fm, fb);
    scale += std::abs(s);
    stack.push_back({pa, 0.5 * (pa + pb), pb, fa, fm, fb, s, 0.0, 0});
  }
  const double total_tol = std::max(options.rel_tol * scale, options.abs_tol);
  for (auto& p : stack) p.tol = total_tol * (p.b - p.a) / (b - a);

  std::size_t intervals = stack.size();
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    const bool tiny = !(lm > p.a && rm < p.b);
    if (std::abs(delta) <= 15.0 * p.tol || p.depth >= options.max_depth || tiny ||
        intervals >= options.max_intervals) {
      if (std::abs(delta) > 15.0 * p.tol) result.converged = false;
      result.value += left + right + delta / 15.0;
      result.error_estimate += std::abs(delta) / 15.0;
      continue;
    }
    ++intervals;
    stack.push_back({p.a, lm, p.m, p.fa, flm, p.fm, left, 0.5 * p.tol, p.depth + 1});
    stack.push_back({p.m, rm, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol, p.depth + 1});
  }
  result.intervals = intervals;
  if (!std::isfinite(result.value)) result.converged = false;
  return result;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const SimpsonOptions& options) {
  const auto r = adaptive_simpson(f, a, b, options);
  if (!r.converged) {
    throw ConvergenceError("adaptive Simpson did not reach tolerance on [" +
                           std::to_string(a) + ", " + std::to_string(b) + "] after " +
                           std::to_string(r.intervals) + " intervals");
  }
  return r.value;
}

}  // namespace decaylab::numeric
