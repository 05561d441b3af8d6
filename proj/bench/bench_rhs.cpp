// Serial reference RHS against the OpenMP / prefix-sum implementation.
// Run with COAGKIN_THREADS or OMP_NUM_THREADS to vary the worker count.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "coagkin/kernel.hpp"
#include "coagkin/system.hpp"

namespace {

using namespace coagkin;

std::vector<double> state(std::size_t k) {
  std::vector<double> xi(k);
  for (std::size_t i = 0; i < k; ++i) xi[i] = std::exp(-0.01 * static_cast<double>(i));
  return xi;
}

const CoagulationKernel& brownian() {
  static const auto kernel = CoagulationKernel::tabulated(brownian_table(2048), {2.0, 1.0 / 3.0, 4.0});
  return kernel;
}

const CoagulationKernel& power() {
  static const auto kernel = CoagulationKernel::power_sum(1.0, 0.5, {1.0, 0.5, 2.0});
  return kernel;
}

template <bool Reference>
void run(benchmark::State& st, const CoagulationKernel& kernel) {
  const auto k = static_cast<std::size_t>(st.range(0));
  const auto xi = state(k);
  std::vector<double> out(k);
  for (auto _ : st) {
    if constexpr (Reference) {
      reference::rhs_into(xi, kernel, out);
    } else {
      rhs_into(xi, kernel, out);
    }
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  st.SetComplexityN(static_cast<benchmark::IterationCount>(k));
}

void BM_TableReference(benchmark::State& st) { run<true>(st, brownian()); }
void BM_TableParallel(benchmark::State& st) { run<false>(st, brownian()); }
void BM_PowerReference(benchmark::State& st) { run<true>(st, power()); }
void BM_PowerSeparable(benchmark::State& st) { run<false>(st, power()); }

}  // namespace

BENCHMARK(BM_TableReference)->RangeMultiplier(2)->Range(256, 2048)->Complexity();
BENCHMARK(BM_TableParallel)->RangeMultiplier(2)->Range(256, 2048)->Complexity();
BENCHMARK(BM_PowerReference)->RangeMultiplier(2)->Range(256, 2048)->Complexity();
BENCHMARK(BM_PowerSeparable)->RangeMultiplier(2)->Range(256, 2048)->Complexity();

BENCHMARK_MAIN();
