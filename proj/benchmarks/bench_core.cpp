#include <benchmark/benchmark.h>

#include "decaylab/compare.hpp"
#include "decaylab/feedback.hpp"
#include "decaylab/harness.hpp"
#include "decaylab/transform.hpp"
#include "decaylab/wave.hpp"

using namespace decaylab;

namespace {

feedback::FeedbackLaw cubic() { return feedback::make_feedback(feedback::Family::power, {3.0, 0.0}); }

void BM_Conjugate(benchmark::State& state) {
  const auto law = feedback::make_feedback(feedback::Family::exp_inv_square, {});
  double y = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transform::conjugate(law, y));
    y = y < 10.0 ? y * 1.01 : 0.1;
  }
}
BENCHMARK(BM_Conjugate);

void BM_InverseL(benchmark::State& state) {
  const auto law = cubic();
  for (auto _ : state) benchmark::DoNotOptimize(transform::inverse_L(law, 0.3));
}
BENCHMARK(BM_InverseL);

void BM_EnvelopeGeneral(benchmark::State& state) {
  transform::DecayEnvelope env;
  env.law = cubic();
  for (auto _ : state) benchmark::DoNotOptimize(transform::envelope_general(env, 100.0));
}
BENCHMARK(BM_EnvelopeGeneral);

void BM_WaveStep(benchmark::State& state) {
  wave::SimulationConfig cfg;
  cfg.law = cubic();
  cfg.n = static_cast<int>(state.range(0));
  cfg.u0 = {wave::InitialShape::sine, 0.2, 1};
  cfg.damping = {feedback::Profile::indicator, 0.2, 0.6, 1.0, 1.0};
  cfg.alpha = {feedback::Profile::indicator, 0.4, 0.9, 0.2, 0.2};
  auto s = wave::init_state(cfg);
  for (auto _ : state) wave::step(s);
  state.SetItemsProcessed(state.iterations() * cfg.n);
}
BENCHMARK(BM_WaveStep)->Arg(99)->Arg(399)->Arg(1599);

void BM_ComparisonOde(benchmark::State& state) {
  const auto law = cubic();
  for (auto _ : state) benchmark::DoNotOptimize(compare::solve_comparison(law, 1.0, 1.0, 1000.0, 101));
}
BENCHMARK(BM_ComparisonOde);

void BM_InequalityCheck(benchmark::State& state) {
  const auto s = harness::sample_function([](double t) { return 1.0 / (1.0 + t); }, 0.0, 2000.0, 2001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(harness::check_integral_inequality(s, [](double y) { return y; }));
  }
}
BENCHMARK(BM_InequalityCheck);

}  // namespace
BENCHMARK_MAIN();
