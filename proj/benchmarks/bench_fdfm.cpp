#include <fdfm/fdfm.hpp>

#include <benchmark/benchmark.h>

using namespace fdfm;

namespace {

SimulatedPanel sample(Eigen::Index n, Eigen::Index m) {
  SimulationSpec spec;
  spec.periods = n;
  spec.maturities = m;
  return simulate_panel(spec);
}

FdfmParameters truth_params(const SimulatedPanel& sim) {
  return FdfmParameters{sim.loadings, sim.processes, 0.01, {0.0, 0.0}};
}

}  // namespace

static void BM_EStep(benchmark::State& state) {
  const auto sim = sample(state.range(0), 18);
  const auto params = truth_params(sim);
  for (auto _ : state) benchmark::DoNotOptimize(e_step(params, sim.panel));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EStep)->RangeMultiplier(2)->Range(64, 512)->Complexity();

// full 25-point grid scan for one factor
static void BM_GcvScan(benchmark::State& state) {
  const auto sim = sample(200, state.range(0));
  const auto params = truth_params(sim);
  const auto post = e_step(params, sim.panel);
  const auto pen = build_penalty(sim.panel.grid());
  const auto prob = ridge_problem(0, sim.panel, post, params.loadings, params.sigma2);
  const auto grid = default_lambda_grid();
  for (auto _ : state) benchmark::DoNotOptimize(select_lambda(prob, grid, pen));
}
BENCHMARK(BM_GcvScan)->Arg(12)->Arg(18)->Arg(40);

static void BM_Fit(benchmark::State& state) {
  const auto sim = sample(state.range(0), 18);
  FdfmConfig cfg;
  cfg.factors = 2;
  cfg.max_iterations = 50;
  for (auto _ : state) benchmark::DoNotOptimize(fit(sim.panel, cfg));
}
BENCHMARK(BM_Fit)->Arg(108)->Arg(192)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
