#include <benchmark/benchmark.h>

#include <random>

#include "expdamp/dynamics.hpp"
#include "expdamp/fft.hpp"
#include "expdamp/kernels.hpp"
#include "expdamp/parallel.hpp"

using namespace expdamp;

namespace {

RealVectorField random_field(const Grid& g, double scale) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-scale, scale);
  RealVectorField f(g);
  for (double& v : f.values()) v = u(rng);
  return f;
}

void damping_args(benchmark::internal::Benchmark* b) {
  for (int n : {32, 64, 96}) b->Args({n, 1})->Args({n, 4})->Args({n, 8});
}

}  // namespace

static void BM_DampingSerial(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  set_num_threads(1);
  const RealVectorField u = random_field(g, 1.0);
  const RealVectorField& cu = u;
  RealVectorField out(g);
  for (auto _ : state) {
    auto s = kernels::serial::damping(kernels::components(cu), kernels::components(out), 1.0, 1.0,
                                      std::nullopt);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * g.points());
}
BENCHMARK(BM_DampingSerial)->Arg(32)->Arg(64)->Arg(96)->Unit(benchmark::kMicrosecond);

static void BM_DampingParallel(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  set_num_threads(static_cast<int>(state.range(1)));
  const RealVectorField u = random_field(g, 1.0);
  const RealVectorField& cu = u;
  RealVectorField out(g);
  for (auto _ : state) {
    auto s = kernels::parallel::damping(kernels::components(cu), kernels::components(out), 1.0,
                                        1.0, std::nullopt);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * g.points());
  set_num_threads(1);
}
BENCHMARK(BM_DampingParallel)->Apply(damping_args)->Unit(benchmark::kMicrosecond)->UseRealTime();

static void BM_LeraySerial(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const auto f = forward_transform(random_field(g, 1.0));
  auto w = f;
  for (auto _ : state) {
    w = f;
    kernels::serial::leray(w);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_LeraySerial)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_LerayParallel(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const auto f = forward_transform(random_field(g, 1.0));
  set_num_threads(static_cast<int>(state.range(1)));
  auto w = f;
  for (auto _ : state) {
    w = f;
    kernels::parallel::leray(w);
    benchmark::ClobberMemory();
  }
  set_num_threads(1);
}
BENCHMARK(BM_LerayParallel)
    ->Args({32, 4})
    ->Args({64, 4})
    ->Args({64, 8})
    ->Unit(benchmark::kMicrosecond)
    ->UseRealTime();

static void BM_ProjectedRhs(benchmark::State& state) {
  SimConfig c;
  c.grid = Grid(static_cast<int>(state.range(0)));
  c.cutoff = 0.3 * c.grid.n();
  c.ic.kind = InitialCondition::Kind::taylor_green;
  set_num_threads(static_cast<int>(state.range(1)));
  const State s = make_initial_state(c);
  for (auto _ : state) benchmark::DoNotOptimize(projected_rhs(s, c));
  set_num_threads(1);
}
BENCHMARK(BM_ProjectedRhs)
    ->Args({32, 1})
    ->Args({32, 4})
    ->Args({48, 1})
    ->Args({48, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
