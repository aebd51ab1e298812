// Serial reference vs OpenMP kernels. Set SHB_THREADS / OMP_NUM_THREADS to vary workers.

#include <benchmark/benchmark.h>

#include "shbreg/harness.hpp"

using namespace shbreg;

namespace {

const ProblemInstance& example1() {
  static const ProblemInstance prob = build_example1(200, 1000);
  return prob;
}

template <auto Kernel>
void BM_Gram(benchmark::State& state) {
  const auto& rows = example1().bundle.rows();
  const Vector x(example1().truth);
  Vector scratch(rows.size()), out(x.size());
  for (auto _ : state) {
    Kernel(rows, x, scratch, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size() * x.size()));
}

template <auto Ensemble>
void BM_Ensemble(benchmark::State& state) {
  const ProblemInstance& prob = example1();
  static const NoisyData d = add_noise(prob, 1e-2, 1);
  const auto iters = static_cast<std::size_t>(state.range(0));
  const RunSpec spec = hilbert_run_spec(prob, d, StepPolicy::constant(0.6), Variant::SHB, iters);
  for (auto _ : state) {
    auto r = Ensemble(spec, 16, 1);
    benchmark::DoNotOptimize(r.mean_sq_rel_err.data());
  }
  state.SetItemsProcessed(state.iterations() * 16 * static_cast<std::int64_t>(iters));
}

}  // namespace

BENCHMARK(BM_Gram<kernels::gram_apply_serial>)->Name("gram_apply/serial");
BENCHMARK(BM_Gram<kernels::gram_apply>)->Name("gram_apply/openmp");
BENCHMARK(BM_Ensemble<monte_carlo_serial>)->Name("monte_carlo/serial")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble<monte_carlo>)->Name("monte_carlo/openmp")->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
