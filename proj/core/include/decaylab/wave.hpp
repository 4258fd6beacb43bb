#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/feedback.hpp"

namespace decaylab::wave {

using feedback::CoefficientField;
using feedback::FeedbackLaw;

enum class InitialShape { zero, sine, bump };

/// Initial profile on [0, 1] vanishing at both ends.
///   sine:  amplitude * sin(mode * pi * x)
///   bump:  amplitude * cos^2(pi (x - center) / width) on |x - center| < width/2
struct InitialProfile {
  InitialShape shape = InitialShape::zero;
  double amplitude = 1.0;
  int mode = 1;
  double center = 0.5;
  double width = 0.2;

  double value(double x) const;
  /// Throws DomainError if the profile does not vanish at x = 0 and x = 1.
  void validate() const;
};

struct SimulationConfig {
  FeedbackLaw law;
  CoefficientField alpha = CoefficientField::zero();
  CoefficientField damping = CoefficientField::zero();
  /// Smallness bound on the coupling coefficient.
  double alpha_max = 0.2;
  /// Interior grid points; dx = 1 / (n + 1).
  int n = 399;
  double cfl = 0.9;
  /// Explicit time step; overrides cfl when set. Must satisfy dt < dx.
  std::optional<double> dt;
  double t_final = 2000.0;
  double sample_dt = 1.0;
  /// First-order energy E1 is only meaningful for smooth data.
  bool smooth_data = true;
  InitialProfile u0, u1, v0, v1;
  std::string digest;
};

/// Samples at the interior nodes x_j = j / (n + 1), j = 1..n.
std::vector<double> build_coefficients(const CoefficientField& field, int n,
                                       std::optional<double> max_cap = std::nullopt);

/// Two consecutive time levels of (u, v) on the interior nodes, staggered so
/// that u_prev lives at t - dt and u_curr at t. Energies refer to the half
/// step t - dt/2; the first state has its half step at exactly t = 0.
struct WaveState {
  int n = 0;
  double dx = 0.0;
  double dt = 0.0;
  std::vector<double> u_prev, u_curr, v_prev, v_curr;
  /// Level before u_prev, once at least one step has been taken.
  std::vector<double> u_prev2, v_prev2;
  std::vector<double> alpha, a;
  /// Midpoint velocity of the last step, reused as the Newton start.
  std::vector<double> s_last;
  FeedbackLaw law;
  double t = 0.0;
  std::int64_t steps = 0;
  double e1_start = 0.0;
};

double time_step(const SimulationConfig& config);

WaveState init_state(const SimulationConfig& config);

/// One leapfrog step with implicit midpoint damping and coupling. Throws
/// ConvergenceError (naming the node) if a nodal solve fails.
void step(WaveState& state);

struct Energies {
  double E = 0.0;
  /// NaN until a second-difference is available.
  double E1 = 0.0;
};

/// Discrete energy at the half step t - dt/2: kinetic part from the centred
/// velocity, potential part from the product of forward-difference
/// gradients at the two levels (the functional the scheme conserves).
Energies energy(const WaveState& state);

/// Time at which energy() and dissipation_rate() are evaluated.
double energy_time(const WaveState& state);

/// -sum_j dx u'_j rho(x_j, u'_j) at the half step; always <= 0.
double dissipation_rate(const WaveState& state);

/// Swaps the two time levels; stepping the result runs the undamped,
/// uncoupled scheme backwards in time.
WaveState reversed(const WaveState& state);

struct EnergySample {
  double t = 0.0;
  double E = 0.0;
  double E1 = 0.0;
  double dissipation = 0.0;
};

struct TraceMeta {
  std::string config_digest;
  int n = 0;
  double dx = 0.0;
  double dt = 0.0;
  std::int64_t steps = 0;
  bool stopped_early = false;
  /// max over steps of (E_{k+1} - E_k) / E(0); <= 0 means monotone.
  double max_step_increase = 0.0;
  /// max over steps of |E_k - E(0)| / E(0).
  double max_drift = 0.0;
};

struct EnergyTrace {
  std::vector<EnergySample> samples;
  TraceMeta meta;
};

EnergyTrace run(const SimulationConfig& config);

/// CSV with header `t,E,E1,dissipation`, 17 significant digits.
void write_trace_csv(const EnergyTrace& trace, const std::string& path);
std::string trace_csv(const EnergyTrace& trace);
EnergyTrace read_trace_csv(const std::string& path);

/// 64-bit FNV-1a hash rendered as 16 hex digits.
std::string digest(const std::string& text);

}  // namespace decaylab::wave
