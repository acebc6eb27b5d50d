#include <benchmark/benchmark.h>

#include "lrk/dlr.hpp"
#include "lrk/full_rank.hpp"
#include "lrk/problems.hpp"

using namespace lrk;

namespace {

void BM_Assembly(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relax::system(n, n, 2));
}
BENCHMARK(BM_Assembly)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_FullRankStep(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto sys = relax::system(n, n, 2);
  Matrix F = project_initial(sys.mesh, relax::f0, sys.A1);
  FullRankStepper stepper(sys, 0.05);
  for (auto _ : state) {
    F = stepper.step(F);
    benchmark::DoNotOptimize(F.data());
  }
}
BENCHMARK(BM_FullRankStep)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_Gsvd(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto sys = relax::system(n, n, 2);
  SqrtPair sq = matrix_sqrt(sys.A1);
  Matrix F = project_initial(sys.mesh, relax::f0, sys.A1);
  for (auto _ : state) benchmark::DoNotOptimize(gsvd(F, sq, 3));
}
BENCHMARK(BM_Gsvd)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_SiuiStep(benchmark::State& state) {
  int r = static_cast<int>(state.range(0));
  auto sys = relax::system(160, 160, 2);
  SqrtPair sq = matrix_sqrt(sys.A1);
  LowRankState st = init_low_rank(project_initial(sys.mesh, relax::f0, sys.A1), r, sq);
  SiuiConfig cfg{1e-4};
  cfg.parallel_kl = state.range(1) != 0;
  for (auto _ : state) {
    st = siui_step(st, cfg, sys, sq);
    benchmark::DoNotOptimize(st.S.data());
  }
}
BENCHMARK(BM_SiuiStep)->Args({1, 0})->Args({3, 0})->Args({9, 0})->Args({3, 1})->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
