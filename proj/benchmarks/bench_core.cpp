#include <benchmark/benchmark.h>

#include "adrc/sim.hpp"
#include "adrc/stability.hpp"

using namespace adrc;

namespace {

ScaledGainSet table_gains(int n = 1) {
  ScaledGainSet g;
  g.Kp = Vec::Constant(n, 1.0);
  g.Kd = Vec::Constant(n, 2.0);
  g.K1 = Vec::Constant(n, 3.0);
  g.K2 = Vec::Constant(n, 3.0);
  g.K3 = Vec::Constant(n, 1.0);
  return g;
}

void BM_ScenarioSecond(benchmark::State& state) {
  // One simulated second of the scalar tracking loop at the default step.
  for (auto _ : state) {
    PlantModel plant(Mat::Identity(1, 1), Vec::Constant(1, 0.1), zero_component(1),
                     zero_component(1), zero_disturbance(1));
    ScenarioConfig cfg(std::move(plant), sine_reference(1.0, 10.0, 1),
                       unscale_gains(table_gains(), 1.0, 0.15), 1.0, 0.15);
    cfg.duration = 1.0;
    cfg.step = 1e-4;
    cfg.record_stride = 100;
    auto result = run_scenario(cfg);
    benchmark::DoNotOptimize(result.ise);
  }
}
BENCHMARK(BM_ScenarioSecond)->Unit(benchmark::kMillisecond);

void BM_TelescopeSecond(benchmark::State& state) {
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = 0.2;
  B(1, 1) = 1.0 / 30.0;
  GainSet raw;
  raw.K1 = Vec(2);
  raw.K1 << 1.2e3, 2.4e2;
  raw.K2 = Vec(2);
  raw.K2 << 5.7e5, 2.28e4;
  raw.K3 = Vec(2);
  raw.K3 << 1e8, 8e5;
  raw.Kp = Vec::Constant(2, 225.0);
  raw.Kd = Vec::Constant(2, 24.0);
  const double w_traj = 2.0 * M_PI / 30.0;
  for (auto _ : state) {
    PlantModel plant(B, Vec::Constant(2, 1e-3), tanh_friction(Schedule::constant(-0.15), 1e3),
                     zero_component(2), zero_disturbance(2));
    ScenarioConfig cfg(std::move(plant), sine_reference(3.634e-2 / w_traj, w_traj, 2), raw,
                       1.0, 1.0);
    cfg.input_model = InputModel::pi_current_loop;
    cfg.duration = 1.0;
    cfg.step = 1e-4;
    cfg.record_stride = 100;
    auto result = run_scenario(cfg);
    benchmark::DoNotOptimize(result.ise);
  }
}
BENCHMARK(BM_TelescopeSecond)->Unit(benchmark::kMillisecond);

void BM_CertificatePoint(benchmark::State& state) {
  StabilityProblem p{table_gains(), 1e-8 * Mat::Identity(2, 2), 0.1 * Mat::Identity(3, 3),
                     Mat::Identity(1, 1), Vec::Constant(1, 0.1), DisturbanceBounds{},
                     {1.0, 10.0, 100.0, 1000.0}};
  for (auto _ : state) {
    auto r = evaluate_certificate(p, 0.7, 0.01);
    benchmark::DoNotOptimize(r.lambda_min_QY1);
  }
}
BENCHMARK(BM_CertificatePoint);

void BM_OmegaSweep(benchmark::State& state) {
  StabilityProblem p{table_gains(), 1e-8 * Mat::Identity(2, 2), 0.1 * Mat::Identity(3, 3),
                     Mat::Identity(1, 1), Vec::Constant(1, 0.1), DisturbanceBounds{},
                     {1.0, 10.0, 100.0, 1000.0}};
  SweepGrid grid;
  grid.points = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto sets = feasible_sets(p, 1.0, 0.01, grid, grid);
    benchmark::DoNotOptimize(sets.omega_feasible.size());
  }
}
BENCHMARK(BM_OmegaSweep)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_LyapunovSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ScaledSystem sys = ScaledSystem::from_scaled(table_gains(n), 1.0, 1.0);
  const Mat q = Mat::Identity(3 * n, 3 * n);
  for (auto _ : state) {
    Mat p = solve_lyapunov(sys.Ho_bar(), q);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_LyapunovSolve)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
