#include <benchmark/benchmark.h>

#include "sdae/generator.hpp"
#include "sdae/problems.hpp"

using namespace sdae;

namespace {

Vec sample_point(int i) {
  static const ManifoldPtr s2 = make_unit_sphere(3);
  CounterRng rng(7, static_cast<std::uint64_t>(i));
  return s2->sample(rng);
}

void BM_TangentProjection(benchmark::State& state) {
  const ManifoldPtr s2 = make_unit_sphere(3);
  const Vec x = sample_point(1);
  Vec v(3);
  v << 0.3, -1.2, 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2->tangent_projector(x, v));
  }
}
BENCHMARK(BM_TangentProjection);

void BM_ChartRoundtrip(benchmark::State& state) {
  const ManifoldPtr s2 = make_unit_sphere(3);
  const Vec x = sample_point(2);
  const Chart& chart = s2->chart_for(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chart.from_coords(chart.to_coords(x)));
  }
}
BENCHMARK(BM_ChartRoundtrip);

void BM_StratonovichGenerator(benchmark::State& state) {
  const ManifoldPtr s2 = make_unit_sphere(3);
  const Vec x = sample_point(3);
  const VectorField k1 = projected_field(s2, Vec::Unit(3, 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratonovich_generator(s2, k1, x));
  }
}
BENCHMARK(BM_StratonovichGenerator);

void BM_CovariantDerivative(benchmark::State& state) {
  const ManifoldPtr s2 = make_unit_sphere(3);
  const Vec x = sample_point(4);
  const VectorField k1 = projected_field(s2, Vec::Unit(3, 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(covariant_derivative(s2, k1, x));
  }
}
BENCHMARK(BM_CovariantDerivative);

}  // namespace
