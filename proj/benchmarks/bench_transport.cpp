#include <benchmark/benchmark.h>

#include "voxmc/transport.hpp"

using namespace voxmc;

namespace {

void BM_PhotonWalk(benchmark::State& state) {
  auto setup = benchmark_preset(state.range(0) == 0 ? Benchmark::B1 : Benchmark::B2);
  Scene scene{setup.grid, setup.source};
  FluenceMap map(setup.grid.dims(), setup.config.photon_count);
  std::uint64_t idx = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_photon(idx++, scene, setup.config, map));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_HgScatter(benchmark::State& state) {
  RngStream rng(3, 0);
  Vec3 d{0.0, 0.0, 1.0};
  for (auto _ : state) {
    d = hg_scatter(d, 0.9, rng);
    benchmark::DoNotOptimize(d);
  }
}

}  // namespace

BENCHMARK(BM_PhotonWalk)->Arg(0)->Arg(1);
BENCHMARK(BM_HgScatter);
BENCHMARK_MAIN();
