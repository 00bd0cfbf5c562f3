#include <benchmark/benchmark.h>

#include "nesgd/geometry.hpp"
#include "nesgd/lemma_lab.hpp"
#include "nesgd/optimizer.hpp"
#include "nesgd/problems.hpp"

using namespace nesgd;

namespace {

OperatorSpace space_for(int kind, Index n) {
  switch (kind) {
    case 0:
      return OperatorSpace::scalar(n * n);
    case 1:
      return OperatorSpace::diagonal(n * n);
    default:
      return OperatorSpace::left_matrix(n, n);
  }
}

void BM_Lmo(benchmark::State& state) {
  const auto space = space_for(static_cast<int>(state.range(0)), state.range(1));
  Rng rng(1);
  const Point g = lab::random_point(space, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lmo(space, g));
  state.SetLabel(space.describe());
}
BENCHMARK(BM_Lmo)->ArgsProduct({{0, 1, 2}, {4, 16, 32}});

void BM_DualNorm(benchmark::State& state) {
  const auto space = space_for(static_cast<int>(state.range(0)), state.range(1));
  Rng rng(2);
  const Point g = lab::random_point(space, rng);
  for (auto _ : state) benchmark::DoNotOptimize(norm_R_star(space, g));
  state.SetLabel(space.describe());
}
BENCHMARK(BM_DualNorm)->ArgsProduct({{0, 1, 2}, {4, 16, 32}});

void BM_TrustRegionStep(benchmark::State& state) {
  const auto space = space_for(static_cast<int>(state.range(0)), 16);
  Rng rng(3);
  const Point x = lab::random_feasible_point(space, 1.0, rng);
  const Point m = lab::random_point(space, rng);
  for (auto _ : state) benchmark::DoNotOptimize(trust_region_step(space, x, m, 1e-2, 1e-2));
  state.SetLabel(space.describe());
}
BENCHMARK(BM_TrustRegionStep)->DenseRange(0, 2);

void BM_RunIterations(benchmark::State& state) {
  const char* names[] = {"isotropic", "sparse-diag", "lowrank-left"};
  const auto p = make_benchmark(names[state.range(0)], {}, 0);
  OptimizerConfig cfg = schedule({Theorem::kT3, true}, 0.1, constants_of(p));
  cfg.K = 1000;
  RunOptions options;
  options.record_rows = false;
  for (auto _ : state) benchmark::DoNotOptimize(run(p, cfg, p.x0, 0, options));
  state.SetItemsProcessed(state.iterations() * cfg.K);
  state.SetLabel(names[state.range(0)]);
}
BENCHMARK(BM_RunIterations)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
