#include "decaylab/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "decaylab/errors.hpp"

namespace decaylab::harness {

namespace pt = boost::property_tree;

namespace {

constexpr double kDefaultAlphaMax = 0.2;

std::string get_string(const pt::ptree& tree, const std::string& path, const std::string& fallback) {
  return tree.get<std::string>(path, fallback);
}

double get_double(const pt::ptree& tree, const std::string& path, double fallback) {
  const auto raw = tree.get_optional<std::string>(path);
  if (!raw) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(*raw, &used);
    if (used != raw->size()) throw std::invalid_argument(*raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + path + "': expected a number, got '" + *raw + "'");
  }
}

std::optional<double> get_optional_double(const pt::ptree& tree, const std::string& path) {
  if (!tree.get_optional<std::string>(path)) return std::nullopt;
  return get_double(tree, path, 0.0);
}

bool get_bool(const pt::ptree& tree, const std::string& path, bool fallback) {
  const auto raw = tree.get_optional<std::string>(path);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "yes" || *raw == "1") return true;
  if (*raw == "false" || *raw == "no" || *raw == "0") return false;
  throw ConfigError("'" + path + "': expected true/false, got '" + *raw + "'");
}

Calibrated get_calibrated(const pt::ptree& tree, const std::string& path) {
  const auto raw = tree.get_optional<std::string>(path);
  if (!raw || *raw == "calibrate" || *raw == "estimate") return {};
  return {get_double(tree, path, 0.0)};
}

feedback::CoefficientField parse_field(const pt::ptree& tree, const std::string& prefix) {
  const std::string base = "coefficients." + prefix;
  const auto profile = tree.get_optional<std::string>(base + "_profile");
  if (!profile || *profile == "none") return feedback::CoefficientField::zero();
  feedback::CoefficientField field;
  field.profile = feedback::parse_profile(*profile);
  std::istringstream support(get_string(tree, base + "_support", ""));
  if (!(support >> field.left >> field.right)) {
    throw ConfigError("'" + base + "_support': expected two numbers 'left right'");
  }
  field.floor = get_double(tree, base + "_floor", 0.0);
  field.cap = get_double(tree, base + "_cap", field.floor);
  return field;
}

wave::InitialProfile parse_profile(const pt::ptree& tree, const std::string& key) {
  wave::InitialProfile profile;
  std::istringstream in(get_string(tree, "initial." + key, "zero"));
  std::string shape;
  in >> shape;
  if (shape == "zero") {
    profile.shape = wave::InitialShape::zero;
  } else if (shape == "sine") {
    profile.shape = wave::InitialShape::sine;
    in >> profile.amplitude;
    if (!(in >> profile.mode)) profile.mode = 1;
  } else if (shape == "bump") {
    profile.shape = wave::InitialShape::bump;
    if (!(in >> profile.amplitude >> profile.center >> profile.width)) {
      throw ConfigError("'initial." + key + "': bump needs 'amplitude center width'");
    }
  } else {
    throw ConfigError("'initial." + key + "': unknown shape '" + shape + "'");
  }
  return profile;
}

}  // namespace

std::string_view to_string(FitMode mode) {
  switch (mode) {
    case FitMode::power: return "power";
    case FitMode::log_log: return "log_log";
    case FitMode::stretched: return "stretched";
    case FitMode::exponential: return "exponential";
  }
  return "power";
}

FitMode parse_fit_mode(std::string_view name) {
  for (auto m : {FitMode::power, FitMode::log_log, FitMode::stretched, FitMode::exponential}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown fit mode '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.name = name;
  auto& sim = cfg.sim;
  try {
    const auto family = feedback::parse_family(get_string(tree, "law.family", "power"));
    feedback::FeedbackParams params;
    params.p = get_double(tree, "law.p", family == feedback::Family::power ? 3.0 : 3.0);
    params.q = get_double(tree, "law.q", 2.0);
    sim.law = feedback::make_feedback(family, params, get_optional_double(tree, "law.r0"));

    sim.alpha = parse_field(tree, "alpha");
    sim.damping = parse_field(tree, "damping");
    sim.alpha_max = get_double(tree, "coefficients.alpha_max", kDefaultAlphaMax);
    if (sim.alpha_max != kDefaultAlphaMax) {
      cfg.warnings.push_back("alpha_max overridden to " + std::to_string(sim.alpha_max) +
                             "; decay results assume a small coupling");
    }
    feedback::validate(sim.alpha, sim.alpha_max);
    feedback::validate(sim.damping);

    sim.n = static_cast<int>(get_double(tree, "grid.n", 399));
    sim.cfl = get_double(tree, "grid.cfl", 0.9);
    sim.dt = get_optional_double(tree, "grid.dt");
    wave::time_step(sim);

    sim.t_final = get_double(tree, "time.t_final", 2000.0);
    sim.sample_dt = get_double(tree, "time.sample_dt", 1.0);
    if (!(sim.t_final > 0.0) || !(sim.sample_dt > 0.0)) {
      throw ConfigError("time.t_final and time.sample_dt must be positive");
    }

    sim.u0 = parse_profile(tree, "u0");
    sim.u1 = parse_profile(tree, "u1");
    sim.v0 = parse_profile(tree, "v0");
    sim.v1 = parse_profile(tree, "v1");
    for (const auto* p : {&sim.u0, &sim.u1, &sim.v0, &sim.v1}) p->validate();
    sim.smooth_data = get_bool(tree, "initial.smooth", true);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  cfg.envelope.beta = get_calibrated(tree, "envelope.beta");
  cfg.envelope.M = get_calibrated(tree, "envelope.M");
  cfg.envelope.kappa = get_double(tree, "envelope.kappa", 1.0);
  cfg.envelope.gamma_s_C_s = get_calibrated(tree, "envelope.gamma_s_C_s");
  cfg.envelope.T0 = get_calibrated(tree, "envelope.T0");
  cfg.envelope.T1 = get_double(tree, "envelope.T1", 0.0);

  if (const auto mode = tree.get_optional<std::string>("fit.mode")) {
    cfg.fit.mode = parse_fit_mode(*mode);
    cfg.fit.mode_given = true;
  } else if (sim.law.family == feedback::Family::linear) {
    cfg.fit.mode = FitMode::exponential;
  }
  cfg.fit.t_min_fraction = get_double(tree, "fit.t_min_fraction", cfg.fit.t_min_fraction);
  cfg.fit.t_max_fraction = get_double(tree, "fit.t_max_fraction", cfg.fit.t_max_fraction);
  cfg.fit.stretched_p = get_double(tree, "fit.stretched_p", cfg.fit.stretched_p);
  if (!(cfg.fit.t_min_fraction >= 0.0 && cfg.fit.t_min_fraction < cfg.fit.t_max_fraction &&
        cfg.fit.t_max_fraction <= 1.0)) {
    throw ConfigError("fit window fractions must satisfy 0 <= t_min < t_max <= 1");
  }

  const auto weight = get_string(tree, "weight.mode", "optimal");
  if (weight == "optimal") {
    cfg.weight_mode = transform::WeightMode::optimal;
  } else if (weight == "polynomial") {
    cfg.weight_mode = transform::WeightMode::polynomial;
  } else {
    throw ConfigError("unknown weight mode '" + weight + "'");
  }
  cfg.check_horizon_doubling = get_bool(tree, "weight.check_horizon_doubling", false);

  cfg.output.dir = get_string(tree, "output.dir", ".");
  cfg.output.trace = get_string(tree, "output.trace", "trace.csv");
  cfg.output.report = get_string(tree, "output.report", "report");

  sim.digest = wave::digest(text);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::filesystem::path(path).stem().string());
}

}  // namespace decaylab::harness
