#include <benchmark/benchmark.h>

#include <mpcert/bounds.hpp>
#include <mpcert/certify.hpp>
#include <mpcert/ocp.hpp>
#include <mpcert/simulate.hpp>
#include <mpcert/systems.hpp>

namespace {

using namespace mpcert;

StageCost pendulum_cost() {
  return StageCost(SymMatrix::diagonal((Vector(2) << 10.0, 1.0).finished()),
                   SymMatrix(Matrix::Constant(1, 1, 0.1)));
}

void BM_KappaUniform(benchmark::State& state) {
  const double s = static_cast<double>(state.range(0)) * 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kappa_uniform(1.0, 1.1, 10.0, s));
  }
}
BENCHMARK(BM_KappaUniform)->Arg(0)->Arg(1)->Arg(100)->Arg(500);

void BM_RiccatiInfinite(benchmark::State& state) {
  const auto preset = make_preset("pendulum");
  const auto cost = pendulum_cost();
  for (auto _ : state) {
    benchmark::DoNotOptimize(riccati_infinite(preset.surrogate, cost, 1.0));
  }
}
BENCHMARK(BM_RiccatiInfinite);

void BM_RiccatiFinite(benchmark::State& state) {
  const auto preset = make_preset("pendulum");
  const auto cost = pendulum_cost();
  const OCPParams params(1.0, Horizon::finite(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(riccati_finite(preset.surrogate, cost, params));
  }
}
BENCHMARK(BM_RiccatiFinite)->Arg(10)->Arg(41)->Arg(300);

void BM_BuildCertificate(benchmark::State& state) {
  const auto preset = make_preset("pendulum");
  const auto cost = pendulum_cost();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_certificate(preset.surrogate, cost, 1.0, Horizon::finite(41),
                                               1e-5, Region::ball(0.1)));
  }
}
BENCHMARK(BM_BuildCertificate);

void BM_RolloutPendulum(benchmark::State& state) {
  const auto preset = make_preset("pendulum");
  const auto cost = pendulum_cost();
  const auto gain = riccati_finite(preset.surrogate, cost, OCPParams(1.0, Horizon::finite(41))).gain;
  const Vector x0 = (Vector(2) << 0.1, 0.0).finished();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(preset.plant, gain, cost, x0, 1.0, state.range(0)));
  }
}
BENCHMARK(BM_RolloutPendulum)->Arg(200);

void BM_Shooting(benchmark::State& state) {
  const auto preset = make_preset("pendulum");
  const auto cost = pendulum_cost();
  const OCPParams params(1.0, Horizon::finite(state.range(0)));
  const Vector x0 = (Vector(2) << 0.2, 0.0).finished();
  const auto plant = linear_plant(preset.surrogate);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_shooting(plant, cost, params, x0, 1, 1));
  }
}
BENCHMARK(BM_Shooting)->Arg(3)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
