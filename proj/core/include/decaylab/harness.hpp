#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decaylab/config.hpp"
#include "decaylab/transform.hpp"
#include "decaylab/wave.hpp"

namespace decaylab::harness {

using feedback::FeedbackLaw;
using transform::DecayEnvelope;
using Weight = std::function<double(double)>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Sampled energy curve; times strictly increasing.
struct Series {
  std::vector<double> t;
  std::vector<double> E;
};

Series series_from_trace(const wave::EnergyTrace& trace);
Series sample_function(const std::function<double(double)>& E, double t0, double t1, int points);

// ---------------------------------------------------------------------------
// Weighted integral inequality  int_S^T w(E) E dt <= M E(S)

struct InequalityOptions {
  int start_points = 50;
  /// Trace mode: add the tail beyond the last sample from a power-law fit.
  bool extrapolate_tail = false;
  /// Function mode: upper integration limit (infinite uses exp-sinh
  /// quadrature) and the largest start point.
  double horizon = kInfinity;
  double start_max = 100.0;
  /// Allowed per-sample increase, relative to E at the first sample.
  double monotone_tolerance = 1e-11;
};

struct InequalityReport {
  /// Smallest M valid at every start point (sup of integral / E(S)).
  double M = 0.0;
  double M_bound = kInfinity;
  bool passed = false;
  std::vector<double> starts;
  std::vector<double> ratios;
  bool tail_extrapolated = false;
  double tail_integral = 0.0;
  double horizon = 0.0;
};

/// Trace mode: trapezoid sums on the samples. Throws DomainError if the
/// series increases or is negative.
InequalityReport check_integral_inequality(const Series& series, const Weight& w,
                                           double M_bound = kInfinity,
                                           const InequalityOptions& options = {});

/// Function mode: adaptive quadrature of the given energy curve.
InequalityReport check_integral_inequality(const std::function<double(double)>& E,
                                           const Weight& w, double M_bound = kInfinity,
                                           const InequalityOptions& options = {});

// ---------------------------------------------------------------------------
// Synthetic checks of the integral-inequality decay lemmas

struct LemmaCheck {
  std::string name;
  bool passed = false;
  /// Constant measured by check_integral_inequality (M or T).
  double measured = 0.0;
  /// max E(t) / bound(t) over the time grid.
  double worst_ratio = 0.0;
  std::string detail;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  bool passed() const;
};

LemmaReport lemma_suite();

// ---------------------------------------------------------------------------
// Tail fits and envelope comparison

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

struct EnvelopeMargins {
  double min = 0.0;
  double max = 0.0;
  int samples = 0;
  double t_start = 0.0;
};

struct FitReport {
  FitMode mode = FitMode::power;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  Window window;
  int samples = 0;
  std::optional<EnvelopeMargins> margins;
};

/// Fractions of the log-time span [max(t_first, 1), t_last] (linear span
/// for exponential mode).
Window default_window(const Series& series, FitMode mode, double t_min_fraction = 2.0 / 3.0,
                      double t_max_fraction = 1.0);

/// Least squares of log E against the mode's abscissa over samples in the
/// window. Throws DomainError with fewer than 10 usable samples.
FitReport fit_tail_exponent(const Series& series, Window window, FitMode mode = FitMode::power,
                            double stretched_p = 3.0);

double envelope_value(const DecayEnvelope& env, double t);

/// Margins E / envelope over samples in the window that lie in the
/// envelope's domain. The general envelope is evaluated on at most
/// `max_points` samples. Throws DomainError on an empty overlap.
FitReport compare_to_envelope(const Series& series, const DecayEnvelope& env, Window window,
                              int max_points = 200);

inline bool upper_envelope_holds(const EnvelopeMargins& m) { return m.max <= 1.0 + 1e-9; }
inline bool lower_envelope_holds(const EnvelopeMargins& m) { return m.min >= 1.0 - 1e-9; }

/// Energy at time t by linear interpolation of the series.
double interpolate(const Series& series, double t);

/// Envelopes matched to the series at t_c. beta defaults to
/// E(0) / (2 L(H'(r0^2))).
DecayEnvelope calibrate_simplified(const FeedbackLaw& law, const Series& series, double t_c,
                                   std::optional<double> beta = std::nullopt, double kappa = 1.0);
DecayEnvelope calibrate_general(const FeedbackLaw& law, const Series& series, double t_c,
                                std::optional<double> beta = std::nullopt);
DecayEnvelope calibrate_lower(const FeedbackLaw& law, const Series& series, double t_c,
                              double gamma_s, double T0);

// ---------------------------------------------------------------------------
// Experiments

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct ExperimentResult {
  ExperimentConfig config;
  wave::EnergyTrace trace;
  KeyValues report;
  std::vector<Assertion> assertions;
  std::vector<std::string> notes;
  bool passed() const;
  std::string text() const;
  std::string key_values() const;
};

/// Simulation, weighted inequality, tail fit and envelope comparisons.
/// Writes the trace CSV and the two report files under config.output.dir
/// when `write_files` is set.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files = true);

/// Randomised property checks over the calculus, transforms, fits,
/// inequality checker, comparison ODE and a few short simulations.
std::vector<Assertion> invariant_batteries(std::uint64_t seed = 20240601);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);

/// %.17g rendering used in reports.
std::string format_number(double value);

}  // namespace decaylab::harness
