// Serial reference vs OpenMP path of the data-parallel kernels. Run with
// --benchmark_filter=... ; the arg is the problem size.

#include <numbers>

#include <benchmark/benchmark.h>

#include "ostrovsky/bourgain.hpp"
#include "ostrovsky/gibbs.hpp"
#include "ostrovsky/invariance.hpp"

using namespace ostrovsky;

namespace {

GibbsSpec spec_m(int m) {
  GibbsSpec s;
  s.grid = GridSpec::make(2 * std::numbers::pi, m);
  s.auto_cutoff = true;
  return s;
}

void sample(benchmark::State& st, Execution exec) {
  const auto spec = spec_m(32);
  for (auto _ : st) benchmark::DoNotOptimize(sample_gaussian(spec, st.range(0), exec));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void push(benchmark::State& st, Execution exec) {
  const auto ens = sample_gaussian(spec_m(16), st.range(0));
  FlowParams p;
  p.dt = 1e-3;
  for (auto _ : st) benchmark::DoNotOptimize(push_forward(ens, 0.05, p, exec));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void conv(benchmark::State& st, Execution exec) {
  const auto spec = LatticeSpec::make(static_cast<int>(st.range(0)), 0.25);
  const auto f = random_field(spec, 0.0, 1, 0, 8.0);
  const auto g = random_field(spec, 0.0, 1, 1, 8.0);
  for (auto _ : st) benchmark::DoNotOptimize(convolve(f, g, exec));
}

void resonance(benchmark::State& st, Execution exec) {
  for (auto _ : st) benchmark::DoNotOptimize(resonance_scan(static_cast<int>(st.range(0)), 20, exec));
}

}  // namespace

BENCHMARK_CAPTURE(sample, serial, Execution::kSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sample, parallel, Execution::kParallel)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(push, serial, Execution::kSerial)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(push, parallel, Execution::kParallel)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(conv, serial, Execution::kSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(conv, parallel, Execution::kParallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(resonance, serial, Execution::kSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(resonance, parallel, Execution::kParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
