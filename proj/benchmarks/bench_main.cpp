#include <benchmark/benchmark.h>

#include "overloadx/diffusion.hpp"
#include "overloadx/fluid.hpp"
#include "overloadx/ftsp.hpp"
#include "overloadx/sim.hpp"

namespace ox = overloadx;

namespace {

ox::FtspModel base_model(ox::Rational r) {
  auto p = ox::base_case();
  p.r12 = r;
  p.r21 = ox::Rational(1, 3);
  return ox::ftsp_rates(p, ox::stationary_point(ox::base_case()).state());
}

void BM_PiBirthDeath(benchmark::State& state) {
  const auto m = base_model(ox::Rational(1, 1));
  for (auto _ : state) benchmark::DoNotOptimize(ox::pi_12(m, ox::PiMethod::birth_death));
}
BENCHMARK(BM_PiBirthDeath);

void BM_PiMatrixGeometric(benchmark::State& state) {
  const auto m = base_model(ox::Rational(state.range(0), state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(ox::pi_12(m, ox::PiMethod::matrix_geometric));
}
BENCHMARK(BM_PiMatrixGeometric)->Args({1, 1})->Args({2, 3})->Args({5, 2});

void BM_TruncatedPoisson(benchmark::State& state) {
  const auto m = base_model(ox::Rational(1, 1));
  const int radius = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ox::solve_truncated(m, radius, true).sigma2);
  state.SetComplexityN(radius);
}
BENCHMARK(BM_TruncatedPoisson)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_FluidIntegrate(benchmark::State& state) {
  const auto p = ox::base_case();
  const ox::FluidState x0{1.0, 0.2, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(ox::integrate_fluid(p, x0, 40.0, 1e-3).size());
}
BENCHMARK(BM_FluidIntegrate)->Unit(benchmark::kMillisecond);

void BM_SteadyStateCovariance(benchmark::State& state) {
  ox::DiffusionOptions o;
  o.method = ox::Sigma2Method::paper_r1;
  const auto p = ox::base_case();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ox::steady_state_covariance(ox::bou_matrices(p, o)).varQs);
  }
}
BENCHMARK(BM_SteadyStateCovariance);

void BM_SimulatorStep(benchmark::State& state) {
  const auto sys = ox::scale(ox::base_case(), static_cast<int>(state.range(0)));
  ox::Simulator sim(sys, ox::init_state(sys, ox::StartMode::fluid), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sim.step().dt);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorStep)->Arg(25)->Arg(400);

void BM_SimulationRun(benchmark::State& state) {
  const auto sys = ox::scale(ox::base_case(), 100);
  ox::RunOptions o;
  o.arrivals = 300000;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ox::run(sys, o, ++seed).mean_q1);
}
BENCHMARK(BM_SimulationRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
