// Micro benchmarks for the hot paths: the SDE steppers, full trajectory
// simulation, stationary density construction, and the exponent estimators.
// The subject system is the bell boundary equilibrium with spiral noise,
// the same configuration the sweeps evaluate hundreds of times.

#include <benchmark/benchmark.h>

#include "tumor_sde/linearize.hpp"
#include "tumor_sde/lyapunov.hpp"
#include "tumor_sde/models.hpp"
#include "tumor_sde/simulate.hpp"

namespace {

using namespace tumor_sde;

LinearSDE subject() {
  const ModelDefinition bell = make_model("bell");
  for (const Equilibrium& eq : find_equilibria(bell))
    if (eq.label == EquilibriumLabel::P1)
      return linearize_at(bell, eq, Mat2{3.0, 2.0, -2.0, 3.0});
  throw std::runtime_error("bell P1 missing");
}

void BM_StepEuler(benchmark::State& state) {
  const SdeSystem sys = make_system(subject());
  Vec2 u{1.0, 0.5};
  for (auto _ : state) {
    u = step_euler(sys, u, 1e-3, 2e-2, -1e-2);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_StepEuler);

void BM_StepEuler2(benchmark::State& state) {
  const SdeSystem sys = make_system(subject());
  Vec2 u{1.0, 0.5};
  for (auto _ : state) {
    u = step_euler2(sys, u, 1e-3, 2e-2, -1e-2);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_StepEuler2);

void BM_StepEuler2Cross(benchmark::State& state) {
  const SdeSystem sys = make_system(subject());
  Vec2 u{1.0, 0.5};
  for (auto _ : state) {
    u = step_euler2_cross(sys, u, 1e-3, 2e-2, -1e-2);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_StepEuler2Cross);

void BM_SimulateTrajectory(benchmark::State& state) {
  const SdeSystem sys = make_system(subject());
  SimConfig cfg;
  cfg.h = 1e-2;
  cfg.steps = std::size_t(state.range(0));
  cfg.initial = {1.0, 0.5};
  cfg.scheme = Scheme::Euler2;
  for (auto _ : state) {
    const Trajectory traj = simulate(sys, cfg, 42);
    benchmark::DoNotOptimize(traj.states.back());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateTrajectory)->Arg(1000)->Arg(5000);

void BM_DensityClosed(benchmark::State& state) {
  const LinearSDE sys = subject();
  for (auto _ : state) {
    const PhaseDensity density = stationary_density_closed(sys, std::size_t(state.range(0)));
    benchmark::DoNotOptimize(density.p.back());
  }
}
BENCHMARK(BM_DensityClosed)->Arg(500)->Arg(2000);

void BM_DensityGrid(benchmark::State& state) {
  const LinearSDE sys = subject();
  GridOptions opt;
  opt.n = std::size_t(state.range(0));
  for (auto _ : state) {
    const PhaseDensity density = stationary_density_grid(sys, opt);
    benchmark::DoNotOptimize(density.p.back());
  }
}
BENCHMARK(BM_DensityGrid)->Arg(500)->Arg(2000);

void BM_LyapunovClosed(benchmark::State& state) {
  const LinearSDE sys = subject();
  for (auto _ : state) {
    const LyapunovResult r = lyapunov_closed(sys, 2000);
    benchmark::DoNotOptimize(r.lambda);
  }
}
BENCHMARK(BM_LyapunovClosed);

void BM_LyapunovGrid(benchmark::State& state) {
  const LinearSDE sys = subject();
  for (auto _ : state) {
    const LyapunovResult r = lyapunov_grid(sys, GridOptions{});
    benchmark::DoNotOptimize(r.lambda);
  }
}
BENCHMARK(BM_LyapunovGrid);

void BM_LyapunovMc(benchmark::State& state) {
  const LinearSDE sys = subject();
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.steps = 2000;
  cfg.scheme = Scheme::Euler2Cross;
  const auto paths = std::size_t(state.range(0));
  for (auto _ : state) {
    const LyapunovResult r = lyapunov_mc(sys, cfg, paths, 7);
    benchmark::DoNotOptimize(r.lambda);
  }
  state.SetItemsProcessed(state.iterations() * paths * cfg.steps);
}
BENCHMARK(BM_LyapunovMc)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
