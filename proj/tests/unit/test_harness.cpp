#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "decaylab/errors.hpp"
#include "decaylab/harness.hpp"
#include "oracles.hpp"

using namespace decaylab;
using namespace decaylab::harness;

namespace {

const Weight identity = [](double y) { return y; };
const Weight unit = [](double) { return 1.0; };

std::string small_config(const std::string& extra, const std::string& dir) {
  return "[law]\nfamily = power\np = 3\n"
         "[coefficients]\ndamping_profile = indicator\ndamping_support = 0.2 0.6\n"
         "damping_floor = 1\nalpha_profile = indicator\nalpha_support = 0.4 0.9\n"
         "alpha_floor = 0.2\n"
         "[grid]\nn = 49\n[time]\nt_final = 200\n"
         "[initial]\nu0 = sine 0.2 1\nv0 = sine 0.2 1\n"
         "[output]\ndir = " + dir + "\n" + extra;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(IntegralInequality, HarmonicDecayHasUnitConstant) {
  const auto r = check_integral_inequality([](double t) { return 1.0 / (1.0 + t); }, identity);
  EXPECT_NEAR(r.M, 1.0, 1e-6);
  EXPECT_EQ(r.starts.size(), 50u);
  EXPECT_TRUE(r.passed);
}

TEST(IntegralInequality, ExponentialDecayWithConstantWeight) {
  const auto r = check_integral_inequality([](double t) { return std::exp(-t); }, unit);
  EXPECT_NEAR(r.M, 1.0, 1e-6);
}

TEST(IntegralInequality, ConstantEnergyGrowsWithHorizon) {
  InequalityOptions opts;
  opts.start_max = 1.0;
  double previous = 0.0;
  for (double T : {10.0, 100.0, 1000.0}) {
    opts.horizon = T;
    const auto r = check_integral_inequality([](double) { return 0.5; }, identity, 100.0, opts);
    EXPECT_NEAR(r.M, 0.5 * T, 1e-6 * T);
    EXPECT_GT(r.M, previous);
    previous = r.M;
  }
  opts.horizon = 1000.0;
  EXPECT_FALSE(check_integral_inequality([](double) { return 0.5; }, identity, 100.0, opts).passed);
  opts.horizon = kInfinity;
  EXPECT_FALSE(check_integral_inequality([](double) { return 0.5; }, identity, 100.0, opts).passed);
}

TEST(IntegralInequality, TraceModeMatchesQuadrature) {
  const auto s = sample_function([](double t) { return 1.0 / (1.0 + t); }, 0.0, 1000.0, 200001);
  const auto r = check_integral_inequality(s, identity);
  // Finite horizon: the ratio at S = 0 is 1 - 1/1001; the trapezoid sum
  // overshoots by about h^2/12 * int f'' = 4.2e-6.
  EXPECT_NEAR(r.M, 1.0 - 1.0 / 1001.0, 1e-5);
  InequalityOptions opts;
  opts.extrapolate_tail = true;
  const auto tail = check_integral_inequality(s, identity, kInfinity, opts);
  EXPECT_TRUE(tail.tail_extrapolated);
  // The fitted tail exponent is biased by the 1 + t offset, hence the looser bound.
  EXPECT_NEAR(tail.tail_integral, 1.0 / 1001.0, 1e-2 / 1001.0);
  EXPECT_NEAR(tail.M, 1.0, 1e-2);
}

TEST(IntegralInequality, RejectsIncreasingInput) {
  Series s{{0, 1, 2}, {1.0, 2.0, 0.5}};
  EXPECT_THROW(check_integral_inequality(s, identity), DomainError);
  EXPECT_THROW(check_integral_inequality([](double t) { return t; }, identity), DomainError);
}

TEST(LemmaSuite, AllChecksPass) {
  const auto report = lemma_suite();
  EXPECT_TRUE(report.passed());
  EXPECT_GE(report.checks.size(), 4u);
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.detail;
}

TEST(FitTailExponent, ExactPowerLaw) {
  const auto s = sample_function([](double t) { return 5.0 / t; }, 10.0, 1000.0, 500);
  const auto fit = fit_tail_exponent(s, {10.0, 1000.0});
  EXPECT_NEAR(fit.slope, -1.0, 1e-3);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_GE(fit.std_error, 0.0);
  EXPECT_LT(fit.std_error, 1e-8);
}

TEST(FitTailExponent, SlopeApproachesAsymptote) {
  const auto s = sample_function([](double t) { return std::pow(1.0 + t, -2.0); }, 0.0, 1e5, 100001);
  double previous_gap = 1.0;
  for (double lo : {2.0, 20.0, 200.0, 2000.0}) {
    const auto fit = fit_tail_exponent(s, {lo, 10 * lo});
    const double gap = std::abs(fit.slope + 2.0);
    EXPECT_LT(gap, previous_gap);
    previous_gap = gap;
  }
  EXPECT_LT(previous_gap, 1e-3);
}

TEST(FitTailExponent, OtherModes) {
  const auto loglog = sample_function([](double t) { return 3.0 / std::log(t); }, 10.0, 1e6, 2000);
  EXPECT_NEAR(fit_tail_exponent(loglog, {10.0, 1e6}, FitMode::log_log).slope, -1.0, 1e-9);
  const auto stretched = sample_function(
      [](double t) { return std::exp(-2.0 * std::pow(std::log(t), 1.0 / 3.0)); }, 2.0, 1e6, 2000);
  EXPECT_NEAR(fit_tail_exponent(stretched, {2.0, 1e6}, FitMode::stretched, 3.0).slope, -2.0, 1e-9);
  const auto expo = sample_function([](double t) { return 7.0 * std::exp(-0.3 * t); }, 0.0, 50.0, 100);
  EXPECT_NEAR(fit_tail_exponent(expo, {0.0, 50.0}, FitMode::exponential).slope, -0.3, 1e-12);
}

TEST(FitTailExponent, MatchesIndependentLeastSquares) {
  oracle::Gen gen(41);
  Series s;
  std::vector<double> xs, ys;
  for (int i = 1; i <= 300; ++i) {
    const double t = 10.0 * i;
    const double e = std::pow(t, -1.3) * std::exp(gen.uniform(-0.2, 0.2));
    s.t.push_back(t);
    s.E.push_back(e);
    xs.push_back(std::log(t));
    ys.push_back(std::log(e));
  }
  EXPECT_NEAR(fit_tail_exponent(s, {10.0, 3000.0}).slope, oracle::ols_slope(xs, ys), 1e-10);
}

TEST(FitTailExponent, NeedsTenSamples) {
  const auto s = sample_function([](double t) { return 1.0 / t; }, 1.0, 100.0, 100);
  EXPECT_THROW(fit_tail_exponent(s, {1.0, 9.5}), DomainError);
  EXPECT_NO_THROW(fit_tail_exponent(s, {1.0, 10.0}));
}

TEST(DefaultWindow, LastThirdInLogTime) {
  const auto s = sample_function([](double t) { return 1.0 / (1.0 + t); }, 0.0, 1000.0, 1001);
  const auto w = default_window(s, FitMode::power);
  EXPECT_NEAR(w.lo, 100.0, 1e-9);
  EXPECT_EQ(w.hi, 1000.0);
  const auto e = default_window(s, FitMode::exponential);
  EXPECT_NEAR(e.lo, 2000.0 / 3.0, 1e-9);
}

TEST(CompareToEnvelope, SelfComparisonGivesUnitMargins) {
  transform::DecayEnvelope env;
  env.kind = transform::EnvelopeKind::simplified;
  env.law = feedback::make_feedback(feedback::Family::power, {3.0, 0.0});
  env.beta = 0.7;
  env.M = 3.0;
  Series s;
  for (double t = 2.0; t <= 2000.0; t *= 1.01) {
    s.t.push_back(t);
    s.E.push_back(transform::envelope_simplified(env, t));
  }
  const auto r = compare_to_envelope(s, env, {2.0, 2000.0});
  ASSERT_TRUE(r.margins.has_value());
  EXPECT_NEAR(r.margins->min, 1.0, 1e-14);
  EXPECT_NEAR(r.margins->max, 1.0, 1e-14);
  EXPECT_THROW(compare_to_envelope(s, env, {5000.0, 6000.0}), DomainError);
}

TEST(Calibration, EnvelopesMatchTraceAtCalibrationTime) {
  const auto law = feedback::make_feedback(feedback::Family::power, {3.0, 0.0});
  const auto s = sample_function([](double t) { return 0.2 / (1.0 + 0.1 * t); }, 0.0, 500.0, 501);
  const double t_c = 50.0;
  const double e = 0.2 / 6.0;
  EXPECT_NEAR(envelope_value(calibrate_simplified(law, s, t_c), t_c), e, 1e-12);
  EXPECT_NEAR(envelope_value(calibrate_general(law, s, t_c), t_c), e, 1e-9);
  EXPECT_NEAR(envelope_value(calibrate_lower(law, s, t_c, 2.0, 10.0), t_c), e, 1e-12);
  EXPECT_THROW(calibrate_lower(law, s, 5.0, 2.0, 10.0), DomainError);
}

TEST(Config, ParsesSectionsAndDefaults) {
  const auto cfg = parse_config(small_config("[fit]\nmode = power\n", "/tmp/x"), "demo");
  EXPECT_EQ(cfg.name, "demo");
  EXPECT_EQ(cfg.sim.law.family, feedback::Family::power);
  EXPECT_EQ(cfg.sim.n, 49);
  EXPECT_EQ(cfg.sim.damping.left, 0.2);
  EXPECT_EQ(cfg.sim.alpha.floor, 0.2);
  EXPECT_EQ(cfg.sim.u0.shape, wave::InitialShape::sine);
  EXPECT_TRUE(cfg.envelope.M.calibrate());
  EXPECT_TRUE(cfg.warnings.empty());
  EXPECT_EQ(cfg.sim.digest.size(), 16u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("[law]\nfamily = cubic\n"), ConfigError);
  EXPECT_THROW(parse_config("[law]\nfamily = power\np = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("[law]\nfamily = power\np = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\ncfl = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[coefficients]\nalpha_profile = indicator\nalpha_support = 0.4\n"),
               ConfigError);
  EXPECT_THROW(parse_config("[coefficients]\nalpha_profile = indicator\nalpha_support = 0.4 0.9\n"
                            "alpha_floor = 0.5\n"),
               ConfigError);
  EXPECT_THROW(parse_config("[fit]\nt_min_fraction = 0.9\nt_max_fraction = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[initial]\nu0 = bump 1 0.05 0.2\n"), ConfigError);
  EXPECT_THROW(parse_config("this is not ini ["), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, AlphaMaxOverrideWarns) {
  const auto cfg = parse_config("[coefficients]\nalpha_max = 0.5\n");
  ASSERT_EQ(cfg.warnings.size(), 1u);
}

TEST(RunExperiment, UndampedReportsConservationOnly) {
  const auto dir = std::filesystem::temp_directory_path() / "decaylab_undamped";
  auto text = small_config("", dir.string());
  text.replace(text.find("damping_profile = indicator"), 27, "damping_profile = none");
  const auto result = run_experiment(parse_config(text, "undamped"));
  EXPECT_TRUE(result.passed());
  bool conserved = false;
  for (const auto& a : result.assertions) conserved = conserved || a.name == "energy_conserved";
  EXPECT_TRUE(conserved);
  EXPECT_NE(result.key_values().find("fit=skipped"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(RunExperiment, WritesDeterministicReports) {
  const auto dir = std::filesystem::temp_directory_path() / "decaylab_det";
  const auto cfg = parse_config(small_config("", dir.string()), "det");
  const auto first = run_experiment(cfg);
  const auto trace1 = slurp(dir / "trace.csv");
  const auto kv1 = slurp(dir / "report.kv");
  const auto txt1 = slurp(dir / "report.txt");
  run_experiment(cfg);
  EXPECT_EQ(trace1, slurp(dir / "trace.csv"));
  EXPECT_EQ(kv1, slurp(dir / "report.kv"));
  EXPECT_EQ(txt1, slurp(dir / "report.txt"));
  EXPECT_NE(kv1.find("fit.slope="), std::string::npos);
  EXPECT_NE(kv1.find("weight.M="), std::string::npos);
  EXPECT_NE(kv1.find("envelope.simplified.margin_max="), std::string::npos);
  EXPECT_NE(kv1.find("envelope.lower.margin_min="), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "report.kv.tmp"));
  EXPECT_TRUE(first.passed()) << first.text();
  std::filesystem::remove_all(dir);
}

TEST(RunExperiment, LinearLawExponentialMode) {
  const auto dir = std::filesystem::temp_directory_path() / "decaylab_linear";
  auto text = small_config("", dir.string());
  text.replace(text.find("family = power"), 14, "family = linear");
  const auto result = run_experiment(parse_config(text, "linear"), false);
  bool expo = false;
  for (const auto& a : result.assertions) {
    if (a.name == "exponential_tail") expo = a.passed;
  }
  EXPECT_TRUE(expo) << result.text();
  EXPECT_FALSE(std::filesystem::exists(dir));
}
