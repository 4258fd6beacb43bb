#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace decaylab::feedback {

/// Closed-form growth families for g near the origin.
enum class Family {
  linear,           // g(x) = x
  power,            // g(x) = x^p,                 p >= 1
  exp_inv_square,   // g(x) = exp(-1/x^2)
  power_log,        // g(x) = x^p (ln 1/x)^q,      p > 2, q > 1
  sub_exponential,  // g(x) = exp(-(ln 1/x)^p),    p > 2
};

std::string_view to_string(Family family);
/// Parses the names printed by to_string; throws ConfigError otherwise.
Family parse_family(std::string_view name);

struct FeedbackParams {
  double p = 1.0;
  double q = 0.0;
};

/// An immutable damping growth law. H(x) = sqrt(x) g(sqrt(x)) lives on
/// [0, r0^2]; the odd, saturated extension of g is what the simulator uses.
struct FeedbackLaw {
  Family family = Family::linear;
  FeedbackParams params;
  double r0 = 1.0;
  double eps_clip = 1e-300;

  double h_max() const { return r0 * r0; }
  bool is_nonlinear() const;
  std::string describe() const;
};

/// Default right endpoint of the convexity interval for a family.
double default_r0(Family family);

FeedbackLaw make_feedback(Family family, FeedbackParams params,
                          std::optional<double> r0 = std::nullopt);

/// g on [0, r0]; s outside is a DomainError.
double eval_g(const FeedbackLaw& law, double s);

double eval_H(const FeedbackLaw& law, double x);
/// Closed-form derivative; at x = 0 returns the limit.
double eval_H_prime(const FeedbackLaw& law, double x);
/// log H, finite wherever H > 0 mathematically (no underflow).
double log_H(const FeedbackLaw& law, double x);

/// Lambda_H(x) = H(x) / (x H'(x)) on (0, r0^2].
double lambda_H(const FeedbackLaw& law, double x);

struct LimitEstimate {
  double limsup = 0.0;
  double liminf = 0.0;
  double smallest_x = 0.0;
  int samples = 0;
};

/// limsup/liminf of Lambda_H at 0+, sampled on x_k = r0^2 2^-k down to
/// eps_clip and summarised over the final 10 samples.
LimitEstimate lambda_limit(const FeedbackLaw& law, int max_k = 1000);

/// True when the law is away from linear growth (limsup Lambda_H < 1).
bool is_away_from_linear(const FeedbackLaw& law);

struct ConvexityReport {
  bool strictly_convex = false;
  bool h0_ok = false;
  bool hprime0_ok = false;
  double min_second_difference = 0.0;
  int sample_count = 0;
};

/// Sign test of the second differences of H on a uniform grid of (0, r0^2].
ConvexityReport convexity_check(const FeedbackLaw& law, int samples = 10'000);

/// Odd, nondecreasing extension of g: g(|s|) sign(s) up to r0, linear beyond.
double g_hat(const FeedbackLaw& law, double s);
double g_hat_prime(const FeedbackLaw& law, double s);

/// rho(x, s) = a(x) ghat(s).
double rho_eval(const FeedbackLaw& law, double a_value, double s);

// ---------------------------------------------------------------------------
// Coefficient fields alpha(x), a(x) on (0, 1)

enum class Profile { indicator, smooth_bump };

std::string_view to_string(Profile profile);
Profile parse_profile(std::string_view name);

struct CoefficientField {
  Profile profile = Profile::indicator;
  double left = 0.0;
  double right = 1.0;
  double floor = 0.0;
  double cap = 0.0;

  /// Zero field (no support): always evaluates to 0.
  static CoefficientField zero();
  bool is_zero() const { return floor == 0.0 && cap == 0.0; }
};

/// Validates the field; `max_cap` enforces the coupling smallness bound.
void validate(const CoefficientField& field, std::optional<double> max_cap = std::nullopt);

/// Point value. Indicator: floor on the open support, 0 outside.
/// Smooth bump: floor on the inner 80% of the support with C^1 cubic ramps.
double field_value(const CoefficientField& field, double x);

}  // namespace decaylab::feedback
