#include <benchmark/benchmark.h>

#include "sdae/problems.hpp"

using namespace sdae;

namespace {

void BM_SphereYFast(benchmark::State& state) {
  const SDAEProblem p = sphere_problem();
  const Vec x = p.initial_state;
  Vec u(1);
  u << 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(y_value(p, 4.0, x, u, YForm::Linear));
  }
}
BENCHMARK(BM_SphereYFast);

void BM_SphereYGeneric(benchmark::State& state) {
  SDAEProblem p = sphere_problem();
  p.fast_y = nullptr;
  p.analytic_d2y = nullptr;
  const Vec x = p.initial_state;
  Vec u(1);
  u << 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(y_value(p, 4.0, x, u, YForm::Linear));
  }
}
BENCHMARK(BM_SphereYGeneric);

void BM_BoundedMFields(benchmark::State& state) {
  const SDAEProblem p = sphere_problem();
  const Vec x = p.initial_state;
  Vec u(1);
  u << sphere_closed_form_u(x, 4.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bounded_m_fields(p, 4.0, x, u, YForm::Linear));
  }
}
BENCHMARK(BM_BoundedMFields);

void BM_ClosedFormPath(benchmark::State& state) {
  const SDAEProblem p = sphere_problem();
  SolverConfig config;
  config.dt = 1e-3;
  config.t_final = 0.1;
  config.b0 = 256.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_closed_form(
        p, config, [](const Vec& x, double b) { return sphere_closed_form_u(x, b); },
        0));
  }
}
BENCHMARK(BM_ClosedFormPath);

void BM_Algorithm1Block(benchmark::State& state) {
  const SDAEProblem p = sphere_problem();
  SolverConfig config;
  config.dt = 1e-3;
  config.t_final = 0.05;
  config.epsilon = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(algorithm1(p, config, 0));
  }
}
BENCHMARK(BM_Algorithm1Block);

void BM_WienerPath(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(wiener_path(11, 0, 2, 1000, 1e-3));
  }
}
BENCHMARK(BM_WienerPath);

}  // namespace

BENCHMARK_MAIN();
