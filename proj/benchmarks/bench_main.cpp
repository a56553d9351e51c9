#include <benchmark/benchmark.h>

#include <cmath>

#include "nlsn/functionals.hpp"
#include "nlsn/oracle.hpp"
#include "nlsn/solver.hpp"

namespace {

using namespace nlsn;

Params fixture(int N) {
  Params p;
  p.N = N;
  p.p = p.q = N == 2 ? 5.0 : (N == 3 ? 4.0 : 3.5);
  return p;
}

void BM_Laplacian(benchmark::State& state) {
  const GridPtr g = build_grid(3, 20.0, static_cast<std::size_t>(state.range(0)));
  const Field f = Field::sample(g, [](double r) { return std::exp(-r * r); });
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Laplacian)->Arg(4001)->Arg(20001);

void BM_Dilate(benchmark::State& state) {
  const GridPtr g = build_grid(3, 20.0, static_cast<std::size_t>(state.range(0)));
  const Field f = Field::sample(g, [](double r) { return std::exp(-r * r); });
  for (auto _ : state) benchmark::DoNotOptimize(dilate(f, 1.07));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Dilate)->Arg(4001)->Arg(20001);

void BM_ShiftedLaplacianSolve(benchmark::State& state) {
  const GridPtr g = build_grid(3, 20.0, static_cast<std::size_t>(state.range(0)));
  const Field f = Field::sample(g, [](double r) { return std::exp(-r * r); });
  for (auto _ : state) benchmark::DoNotOptimize(solve_shifted_laplacian(f, 1.0));
}
BENCHMARK(BM_ShiftedLaplacianSolve)->Arg(4001)->Arg(20001);

void BM_FiberMaximizer(benchmark::State& state) {
  FiberCoefficients c;
  c.K = 3.0;
  c.A = 0.7;
  c.B = 1.1;
  c.L = 0.2;
  c.exp_p = 3.0;
  c.exp_q = 6.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fiber_maximizer(c));
    c.K = c.K == 3.0 ? 3.0000001 : 3.0;
  }
}
BENCHMARK(BM_FiberMaximizer);

void BM_Phi(benchmark::State& state) {
  const Params p = fixture(3);
  const GridPtr g = solver_grid(p);
  const PairState s = init_state(p, g, 0);
  for (auto _ : state) benchmark::DoNotOptimize(phi(p, s));
}
BENCHMARK(BM_Phi);

void BM_ShootGround(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const double p = N == 1 ? 4.0 : (N == 2 ? 5.0 : (N == 3 ? 4.0 : 3.0));
  for (auto _ : state) benchmark::DoNotOptimize(shoot_ground(N, p));
}
BENCHMARK(BM_ShootGround)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_Descend(benchmark::State& state) {
  const Params p = [&] {
    Params q = fixture(static_cast<int>(state.range(0)));
    q.beta = 1.0;
    return q;
  }();
  for (auto _ : state) {
    const SolveResult r = descend(p, SolverOptions{});
    if (r.status != SolveStatus::Converged) state.SkipWithError("solver did not converge");
    benchmark::DoNotOptimize(r.energy);
  }
}
BENCHMARK(BM_Descend)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
