#include <benchmark/benchmark.h>

#include "chaplygin/diagnostics.hpp"
#include "chaplygin/dynamics.hpp"
#include "chaplygin/systems.hpp"

namespace {

using namespace chaplygin;

SystemDefinition veselova(Index n, VeselovaRealization realization) {
  VeselovaParams p;
  p.n = n;
  p.A = Vec::LinSpaced(n, 1.0, static_cast<double>(n));
  p.realization = realization;
  return make_veselova(p);
}

void BM_GyroParticle(benchmark::State& st) {
  const auto sys = make_nonholonomic_particle({0.3});
  const Vec s = (Vec(2) << 0.2, 0.7).finished();
  for (auto _ : st) benchmark::DoNotOptimize(gyroscopic_coefficients(sys, s));
}
BENCHMARK(BM_GyroParticle);

void BM_GyroVeselovaGroup(benchmark::State& st) {
  const Index n = st.range(0);
  const auto sys = veselova(n, VeselovaRealization::kGroup);
  const Vec s = Vec::Constant(n - 1, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(gyroscopic_coefficients(sys, s));
}
BENCHMARK(BM_GyroVeselovaGroup)->Arg(3)->Arg(4)->Arg(5);

void BM_GyroVeselovaChart(benchmark::State& st) {
  const Index n = st.range(0);
  const auto sys = veselova(n, VeselovaRealization::kChart);
  const Vec s = Vec::Constant(n - 1, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(gyroscopic_coefficients(sys, s));
}
BENCHMARK(BM_GyroVeselovaChart)->Arg(3)->Arg(4)->Arg(5);

void BM_VectorField(benchmark::State& st) {
  const auto sys = veselova(3, VeselovaRealization::kChart);
  const ReducedState x{(Vec(2) << 0.2, -0.1).finished(), (Vec(2) << 0.5, 0.3).finished()};
  for (auto _ : st) benchmark::DoNotOptimize(vector_field(sys, x));
}
BENCHMARK(BM_VectorField);

void BM_Rk45Particle(benchmark::State& st) {
  const auto sys = make_nonholonomic_particle({0.0});
  const ReducedState x0{(Vec(2) << 0.0, 1.0).finished(), (Vec(2) << 1.0, 0.5).finished()};
  IntegrateOptions opts;
  opts.tol = 1e-10;
  for (auto _ : st) benchmark::DoNotOptimize(integrate(sys, x0, 1.0, opts));
}
BENCHMARK(BM_Rk45Particle)->Unit(benchmark::kMillisecond);

void BM_SymplecticVeselova(benchmark::State& st) {
  VeselovaParams p;
  p.A = (Vec(3) << 1.0, 2.0, 3.0).finished();
  const auto sys = make_veselova(p);
  const Vec A = p.A;
  PhiFunction phi{[A](const Vec& s) { return veselova::phi(A, veselova::gamma_from_shape(s)); },
                  std::nullopt};
  const auto hsys = hamiltonise(sys, phi);
  const ReducedState x0{(Vec(2) << 0.2, -0.1).finished(), (Vec(2) << 0.5, 0.3).finished()};
  SymplecticOptions opts;
  opts.sample_stride = 1000;
  for (auto _ : st) benchmark::DoNotOptimize(integrate_symplectic(hsys, x0, 1.0, opts));
}
BENCHMARK(BM_SymplecticVeselova)->Unit(benchmark::kMillisecond);

void BM_LiouvilleResidual(benchmark::State& st) {
  const auto sys = make_nonholonomic_particle({0.5});
  const ReducedState x{(Vec(2) << 0.0, 1.0).finished(), (Vec(2) << 1.0, 1.0).finished()};
  for (auto _ : st) benchmark::DoNotOptimize(liouville_residual(sys, x));
}
BENCHMARK(BM_LiouvilleResidual);

void BM_ExactnessGrid(benchmark::State& st) {
  const auto sys = make_nonholonomic_particle({0.0});
  const auto grid = SampleGrid::uniform(2, -1.0, 1.0, st.range(0));
  DiagnosticsOptions opts;
  opts.threads = 1;
  for (auto _ : st) benchmark::DoNotOptimize(check_exactness_theta(sys, grid, opts));
}
BENCHMARK(BM_ExactnessGrid)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
