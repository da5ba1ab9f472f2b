#include <benchmark/benchmark.h>

#include "clickcount/click_kernel.hpp"
#include "clickcount/detector_mc.hpp"
#include "clickcount/photon_states.hpp"

using namespace clickcount;

static DetectorConfig cfg_of(int n, double eta = 1.0, double nu = 0.0) {
  DetectorConfig cfg;
  cfg.n_detectors = n;
  cfg.eta = eta;
  cfg.nu = nu;
  return cfg;
}

static void BM_ClickDistributionCoherent(benchmark::State& state) {
  auto pnd = coherent_pnd(20.0);
  auto cfg = cfg_of(int(state.range(0)), 0.8, 0.008);
  for (auto _ : state)
    benchmark::DoNotOptimize(click_distribution(pnd, cfg));
}
BENCHMARK(BM_ClickDistributionCoherent)->Arg(8)->Arg(200)->Arg(1024);

static void BM_CoherentClosedForm(benchmark::State& state) {
  auto cfg = cfg_of(int(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(coherent_click_distribution(20.0, cfg));
}
BENCHMARK(BM_CoherentClosedForm)->Arg(200)->Arg(100000);

static void BM_PovmMatrix(benchmark::State& state) {
  auto cfg = cfg_of(int(state.range(0)), 0.8, 0.008);
  for (auto _ : state)
    benchmark::DoNotOptimize(povm_fock_matrix(cfg, 60));
}
BENCHMARK(BM_PovmMatrix)->Arg(25)->Arg(200);

static void BM_ExactDp(benchmark::State& state) {
  auto pnd = coherent_pnd(5.0);
  auto cfg = cfg_of(int(state.range(0)), 0.8, 0.01);
  for (auto _ : state)
    benchmark::DoNotOptimize(exact_dp_oracle(pnd, cfg));
}
BENCHMARK(BM_ExactDp)->Arg(8)->Arg(25);

static void BM_Simulate(benchmark::State& state) {
  auto pnd = fock_pnd(5);
  auto cfg = cfg_of(25, 0.8, 0.008);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_clicks(pnd, cfg, {std::uint64_t(state.range(0)), 7}));
}
BENCHMARK(BM_Simulate)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
