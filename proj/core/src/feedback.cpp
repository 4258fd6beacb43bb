#include "decaylab/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "decaylab/errors.hpp"

namespace decaylab::feedback {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln(1/sqrt(x)), the natural log scale of H for the logarithmic families.
double half_log_inv(double x) { return -0.5 * std::log(x); }

void require_h_domain(const FeedbackLaw& law, double x, const char* op) {
  if (!(x >= 0.0) || x > law.h_max()) {
    std::ostringstream msg;
    msg << op << ": x = " << x << " outside [0, r0^2] = [0, " << law.h_max() << "]";
    throw DomainError(msg.str());
  }
}

// s^p, by repeated multiplication when p is a small integer.
double power_of(double s, double p) {
  if (p == std::floor(p) && p >= 0.0 && p <= 16.0) {
    double r = 1.0;
    for (int i = static_cast<int>(p); i > 0; --i) r *= s;
    return r;
  }
  return std::pow(s, p);
}

double g_unchecked(const FeedbackLaw& law, double s) {
  const double p = law.params.p;
  const double q = law.params.q;
  if (s == 0.0) return 0.0;
  switch (law.family) {
    case Family::linear:
      return s;
    case Family::power:
      return power_of(s, p);
    case Family::exp_inv_square:
      return std::exp(-1.0 / (s * s));
    case Family::power_log:
      return std::pow(s, p) * std::pow(std::log(1.0 / s), q);
    case Family::sub_exponential:
      return std::exp(-std::pow(std::log(1.0 / s), p));
  }
  return 0.0;
}

double g_prime_unchecked(const FeedbackLaw& law, double s) {
  const double p = law.params.p;
  const double q = law.params.q;
  switch (law.family) {
    case Family::linear:
      return 1.0;
    case Family::power:
      if (p == 1.0) return 1.0;
      return s == 0.0 ? 0.0 : p * power_of(s, p - 1.0);
    case Family::exp_inv_square:
      return s == 0.0 ? 0.0 : std::exp(-1.0 / (s * s) + std::log(2.0) - 3.0 * std::log(s));
    case Family::power_log: {
      if (s == 0.0) return 0.0;
      const double l = std::log(1.0 / s);
      return std::pow(s, p - 1.0) * std::pow(l, q - 1.0) * (p * l - q);
    }
    case Family::sub_exponential: {
      if (s == 0.0) return 0.0;
      const double l = std::log(1.0 / s);
      return std::exp(-std::pow(l, p) + std::log(p) + (p - 1.0) * std::log(l) - std::log(s));
    }
  }
  return 0.0;
}

double H_unchecked(const FeedbackLaw& law, double x) {
  if (x == 0.0) return 0.0;
  const double p = law.params.p;
  const double q = law.params.q;
  switch (law.family) {
    case Family::linear:
      return x;
    case Family::power:
      return std::pow(x, 0.5 * (p + 1.0));
    case Family::exp_inv_square:
      return std::sqrt(x) * std::exp(-1.0 / x);
    case Family::power_log:
      return std::pow(x, 0.5 * (p + 1.0)) * std::pow(half_log_inv(x), q);
    case Family::sub_exponential:
      return std::sqrt(x) * std::exp(-std::pow(half_log_inv(x), p));
  }
  return 0.0;
}

double H_prime_unchecked(const FeedbackLaw& law, double x) {
  const double p = law.params.p;
  const double q = law.params.q;
  if (x == 0.0) {
    return (law.family == Family::linear || (law.family == Family::power && p == 1.0)) ? 1.0
                                                                                        : 0.0;
  }
  switch (law.family) {
    case Family::linear:
      return 1.0;
    case Family::power:
      return 0.5 * (p + 1.0) * std::pow(x, 0.5 * (p - 1.0));
    case Family::exp_inv_square:
      return std::exp(-1.0 / x - 0.5 * std::log(x) + std::log(0.5 + 1.0 / x));
    case Family::power_log: {
      const double l = half_log_inv(x);
      return 0.5 * std::pow(x, 0.5 * (p - 1.0)) * std::pow(l, q) * (p + 1.0 - q / l);
    }
    case Family::sub_exponential: {
      const double l = half_log_inv(x);
      return 0.5 / std::sqrt(x) * std::exp(-std::pow(l, p)) * (1.0 + p * std::pow(l, p - 1.0));
    }
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::linear: return "linear";
    case Family::power: return "power";
    case Family::exp_inv_square: return "exp_inv_square";
    case Family::power_log: return "power_log";
    case Family::sub_exponential: return "sub_exponential";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (auto f : {Family::linear, Family::power, Family::exp_inv_square, Family::power_log,
                 Family::sub_exponential}) {
    if (name == to_string(f)) return f;
  }
  throw ConfigError("unknown feedback family '" + std::string(name) + "'");
}

bool FeedbackLaw::is_nonlinear() const {
  return !(family == Family::linear || (family == Family::power && params.p == 1.0));
}

std::string FeedbackLaw::describe() const {
  std::ostringstream out;
  out << to_string(family);
  switch (family) {
    case Family::power:
    case Family::sub_exponential:
      out << "(p=" << params.p << ")";
      break;
    case Family::power_log:
      out << "(p=" << params.p << ",q=" << params.q << ")";
      break;
    default:
      break;
  }
  out << " r0=" << r0;
  return out.str();
}

double default_r0(Family family) {
  switch (family) {
    case Family::linear:
    case Family::power:
      return 1.0;
    case Family::exp_inv_square:
      return 0.5;
    case Family::power_log:
    case Family::sub_exponential:
      return 0.25;
  }
  return 1.0;
}

FeedbackLaw make_feedback(Family family, FeedbackParams params, std::optional<double> r0) {
  FeedbackLaw law;
  law.family = family;
  law.params = params;
  law.r0 = r0.value_or(default_r0(family));
  if (!(law.r0 > 0.0 && law.r0 <= 1.0)) {
    throw DomainError("r0 must lie in (0, 1], got " + std::to_string(law.r0));
  }
  switch (family) {
    case Family::linear:
      law.params = {1.0, 0.0};
      break;
    case Family::power:
      if (!(params.p >= 1.0)) throw DomainError("power law needs p >= 1");
      law.params.q = 0.0;
      break;
    case Family::exp_inv_square:
      law.params = {0.0, 0.0};
      break;
    case Family::power_log:
      if (!(params.p > 2.0)) throw DomainError("power_log law needs p > 2");
      if (!(params.q > 1.0)) throw DomainError("power_log law needs q > 1");
      // g'(x) > 0 only while ln(1/x) > q/p.
      if (!(law.r0 < std::exp(-params.q / params.p))) {
        throw DomainError("power_log law is not increasing up to r0; need r0 < exp(-q/p) = " +
                          std::to_string(std::exp(-params.q / params.p)));
      }
      break;
    case Family::sub_exponential:
      if (!(params.p > 2.0)) throw DomainError("sub_exponential law needs p > 2");
      law.params.q = 0.0;
      break;
  }
  return law;
}

double eval_g(const FeedbackLaw& law, double s) {
  if (!(s >= 0.0) || s > law.r0) throw DomainError("eval_g: s outside [0, r0]");
  return g_unchecked(law, s);
}

double eval_H(const FeedbackLaw& law, double x) {
  require_h_domain(law, x, "eval_H");
  return H_unchecked(law, x);
}

double eval_H_prime(const FeedbackLaw& law, double x) {
  require_h_domain(law, x, "eval_H_prime");
  return H_prime_unchecked(law, x);
}

double log_H(const FeedbackLaw& law, double x) {
  require_h_domain(law, x, "log_H");
  if (x == 0.0) return -kInf;
  const double p = law.params.p;
  const double q = law.params.q;
  const double lx = std::log(x);
  switch (law.family) {
    case Family::linear:
      return lx;
    case Family::power:
      return 0.5 * (p + 1.0) * lx;
    case Family::exp_inv_square:
      return 0.5 * lx - 1.0 / x;
    case Family::power_log:
      return 0.5 * (p + 1.0) * lx + q * std::log(half_log_inv(x));
    case Family::sub_exponential:
      return 0.5 * lx - std::pow(half_log_inv(x), p);
  }
  return -kInf;
}

double lambda_H(const FeedbackLaw& law, double x) {
  if (x == 0.0) throw DomainError("lambda_H is undefined at 0; use lambda_limit");
  require_h_domain(law, x, "lambda_H");
  const double p = law.params.p;
  const double q = law.params.q;
  switch (law.family) {
    case Family::linear:
      return 1.0;
    case Family::power:
      return 2.0 / (p + 1.0);
    case Family::exp_inv_square:
      return 2.0 * x / (x + 2.0);
    case Family::power_log:
      return 2.0 / (p + 1.0 - q / half_log_inv(x));
    case Family::sub_exponential:
      return 2.0 / (1.0 + p * std::pow(half_log_inv(x), p - 1.0));
  }
  return 1.0;
}

LimitEstimate lambda_limit(const FeedbackLaw& law, int max_k) {
  std::vector<double> tail;
  LimitEstimate est;
  double x = law.h_max();
  for (int k = 0; k <= max_k && x >= law.eps_clip; ++k, x *= 0.5) {
    tail.push_back(lambda_H(law, x));
    est.smallest_x = x;
    ++est.samples;
  }
  const auto first = tail.size() > 10 ? tail.end() - 10 : tail.begin();
  est.limsup = *std::max_element(first, tail.end());
  est.liminf = *std::min_element(first, tail.end());
  return est;
}

bool is_away_from_linear(const FeedbackLaw& law) {
  return lambda_limit(law).limsup < 1.0 - 1e-6;
}

ConvexityReport convexity_check(const FeedbackLaw& law, int samples) {
  if (samples < 100) throw DomainError("convexity_check needs at least 100 samples");
  ConvexityReport report;
  report.sample_count = samples;
  report.h0_ok = eval_H(law, 0.0) == 0.0;
  report.hprime0_ok = eval_H_prime(law, 0.0) == 0.0;

  const double h = law.h_max() / samples;
  auto node = [&](int j) { return j == samples ? law.h_max() : h * j; };
  bool all_positive = true;
  double min_d2 = kInf;
  for (int i = 1; i < samples; ++i) {
    const double xl = node(i - 1), xc = node(i), xr = node(i + 1);
    const double hc = H_unchecked(law, xc);
    double d2;
    bool positive;
    if (hc > 1e-250) {
      d2 = H_unchecked(law, xl) - 2.0 * hc + H_unchecked(law, xr);
      positive = d2 > 0.0;
    } else {
      // Values near the underflow threshold: compare in log space relative
      // to the largest of the three.
      const double ll = log_H(law, xl), lc = log_H(law, xc), lr = log_H(law, xr);
      const double m = std::max({ll, lc, lr});
      const double rel = std::exp(ll - m) - 2.0 * std::exp(lc - m) + std::exp(lr - m);
      positive = rel > 0.0;
      d2 = std::copysign(std::exp(m + std::log(std::abs(rel))), rel);
    }
    all_positive = all_positive && positive;
    min_d2 = std::min(min_d2, d2 / (h * h));
  }
  report.strictly_convex = all_positive;
  report.min_second_difference = min_d2;
  return report;
}

double g_hat(const FeedbackLaw& law, double s) {
  const double m = std::abs(s);
  if (m <= law.r0) return std::copysign(g_unchecked(law, m), s);
  return g_unchecked(law, law.r0) / law.r0 * s;
}

double g_hat_prime(const FeedbackLaw& law, double s) {
  const double m = std::abs(s);
  if (m <= law.r0) return g_prime_unchecked(law, m);
  return g_unchecked(law, law.r0) / law.r0;
}

double rho_eval(const FeedbackLaw& law, double a_value, double s) {
  if (!(a_value >= 0.0)) throw DomainError("rho_eval: damping coefficient must be >= 0");
  return a_value * g_hat(law, s);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Profile profile) {
  return profile == Profile::indicator ? "indicator" : "smooth_bump";
}

Profile parse_profile(std::string_view name) {
  if (name == "indicator") return Profile::indicator;
  if (name == "smooth_bump") return Profile::smooth_bump;
  throw ConfigError("unknown coefficient profile '" + std::string(name) + "'");
}

CoefficientField CoefficientField::zero() {
  return CoefficientField{Profile::indicator, 0.0, 1.0, 0.0, 0.0};
}

void validate(const CoefficientField& field, std::optional<double> max_cap) {
  if (field.is_zero()) return;
  if (!(field.left >= 0.0 && field.right <= 1.0 && field.left < field.right)) {
    throw DomainError("coefficient support must be a nonempty open subinterval of (0,1)");
  }
  if (!(field.floor > 0.0)) throw DomainError("coefficient floor must be positive");
  if (field.cap < field.floor) throw DomainError("coefficient cap is below its floor");
  if (max_cap && field.cap > *max_cap) {
    throw DomainError("coefficient cap " + std::to_string(field.cap) +
                      " exceeds the allowed maximum " + std::to_string(*max_cap));
  }
}

double field_value(const CoefficientField& field, double x) {
  if (field.is_zero() || !(x > field.left && x < field.right)) return 0.0;
  if (field.profile == Profile::indicator) return field.floor;
  const double ramp = 0.1 * (field.right - field.left);
  const double s = std::min(x - field.left, field.right - x) / ramp;
  if (s >= 1.0) return field.floor;
  return field.floor * s * s * (3.0 - 2.0 * s);
}

}  // namespace decaylab::feedback
