#include <benchmark/benchmark.h>

#include <memory>

#include "rbhom/config.hpp"
#include "rbhom/sweep.hpp"

namespace {

struct Fixture {
  rbhom::AffineSystem system{rbhom::PeriodicMesh(16)};
  std::vector<rbhom::CellParam> params = rbhom::sample_box({}, 64, 7);
  rbhom::ReducedBasis basis;

  Fixture() {
    const auto train = rbhom::sample_box({}, 20, 1);
    basis = rbhom::greedy_build(system, train, {20, 0.0, rbhom::Execution::parallel}).basis;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void online_sweep(benchmark::State& state, rbhom::Execution execution) {
  auto& f = fixture();
  for (auto _ : state) {
    auto out = rbhom::online_sweep(f.basis, f.params, 0, true, execution);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.params.size()));
}

void truth_sweep(benchmark::State& state, rbhom::Execution execution) {
  auto& f = fixture();
  for (auto _ : state) {
    auto out = rbhom::truth_sweep(f.system, f.params, execution);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.params.size()));
}

}  // namespace

BENCHMARK_CAPTURE(online_sweep, serial, rbhom::Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(online_sweep, parallel, rbhom::Execution::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(truth_sweep, serial, rbhom::Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(truth_sweep, parallel, rbhom::Execution::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
