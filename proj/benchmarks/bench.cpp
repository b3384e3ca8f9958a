#include <benchmark/benchmark.h>

#include "rfdelyap/certify.hpp"
#include "rfdelyap/converse.hpp"
#include "rfdelyap/dini.hpp"
#include "rfdelyap/functionals.hpp"
#include "rfdelyap/integrator.hpp"

using namespace rfdelyap;

namespace {

const RfdeSystem& scalar_system() {
  static const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  return s;
}

void BM_IntegrateScalarDelay(benchmark::State& st) {
  const double h = 0.4 / static_cast<double>(st.range(0));
  Rng rng(1);
  const HistorySegment x0 = random_history(rng, 0.4, h, 1, 1.0);
  const auto d = random_bang_bang(rng, scalar_system().box, 0.0, 10.0, h, 6);
  for (auto _ : st) benchmark::DoNotOptimize(integrate(scalar_system(), 0.0, x0, d, 10.0, IntegratorOptions{h}));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(10.0 / h));
}
BENCHMARK(BM_IntegrateScalarDelay)->Arg(20)->Arg(40)->Arg(80);

void BM_IntegratePlanar(benchmark::State& st) {
  const RfdeSystem s = builtin_example213();
  Rng rng(2);
  const HistorySegment x0 = random_history(rng, 1.0, 0.01, 2, 1.0);
  const auto d = random_bang_bang(rng, s.box, 0.0, 8.0, 0.01, 4);
  for (auto _ : st) benchmark::DoNotOptimize(integrate(s, 0.0, x0, d, 8.0, IntegratorOptions{0.01}));
}
BENCHMARK(BM_IntegratePlanar);

void BM_DiniEstimate(benchmark::State& st) {
  const Functional V = builtin_V212(1.0, 1.1, 0.4, *find_c(1.0, 1.1, 0.4));
  Rng rng(3);
  const HistorySegment x = random_history(rng, 0.8, 0.02, 1, 1.0);
  const State v{-1.05 * x.at(-0.4)[0]};
  DiniOptions o;
  o.levels = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(estimate_V0(V, 0.0, x, v, o));
}
BENCHMARK(BM_DiniEstimate)->Arg(4)->Arg(6)->Arg(8);

void BM_ConverseLevels(benchmark::State& st) {
  ConverseConfig c;
  c.q_max = static_cast<int>(st.range(0));
  c.a2_tilde = [](double s) { return 3.0 * s + 3.0 * s * s; };
  c.grid_step = 0.05;
  Rng rng(4);
  const HistorySegment x = random_history(rng, 0.4, 0.05, 1, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(estimate_Uq_levels(scalar_system(), c, 0.0, x));
}
BENCHMARK(BM_ConverseLevels)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TheoremSuite(benchmark::State& st) {
  const Functional V = builtin_V212(1.0, 1.1, 0.4, *find_c(1.0, 1.1, 0.4));
  SampleSpec s;
  s.histories = 50;
  s.s_batch.count = 50;
  s.times = {0.4, 2.0};
  s.grid_step = 0.02;
  for (auto _ : st) benchmark::DoNotOptimize(check_theorem_conditions(scalar_system(), V, TheoremForm::uniform_restricted, s));
}
BENCHMARK(BM_TheoremSuite)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
