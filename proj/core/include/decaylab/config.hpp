#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decaylab/transform.hpp"
#include "decaylab/wave.hpp"

namespace decaylab::harness {

enum class FitMode {
  power,        // log E against log t
  log_log,      // log E against log ln t
  stretched,    // log E against (ln t)^{1/p}
  exponential,  // log E against t
};

std::string_view to_string(FitMode mode);
FitMode parse_fit_mode(std::string_view name);

/// A value that is either given explicitly or left to the calibration step.
struct Calibrated {
  std::optional<double> value;
  bool calibrate() const { return !value.has_value(); }
};

struct EnvelopeSettings {
  Calibrated beta;
  Calibrated M;
  double kappa = 1.0;
  Calibrated gamma_s_C_s;
  Calibrated T0;
  double T1 = 0.0;
};

struct FitSettings {
  FitMode mode = FitMode::power;
  bool mode_given = false;
  /// Window as fractions of the trace's log-time span [max(t_1, 1), t_end]
  /// (linear span for exponential mode).
  double t_min_fraction = 2.0 / 3.0;
  double t_max_fraction = 1.0;
  /// Exponent of the stretched mode's (ln t)^{1/p} abscissa.
  double stretched_p = 3.0;
};

struct OutputSettings {
  std::string dir = ".";
  std::string trace = "trace.csv";
  std::string report = "report";
};

struct ExperimentConfig {
  std::string name = "experiment";
  wave::SimulationConfig sim;
  EnvelopeSettings envelope;
  FitSettings fit;
  transform::WeightMode weight_mode = transform::WeightMode::optimal;
  /// Repeat the run with a doubled horizon and compare the measured M.
  bool check_horizon_doubling = false;
  OutputSettings output;
  std::vector<std::string> warnings;
};

/// Parses the INI-style experiment description. Sections: law,
/// coefficients, grid, time, initial, envelope, fit, weight, output.
/// Throws ConfigError on malformed or inconsistent input.
ExperimentConfig parse_config(const std::string& text, const std::string& name = "experiment");
ExperimentConfig load_config(const std::string& path);

}  // namespace decaylab::harness
