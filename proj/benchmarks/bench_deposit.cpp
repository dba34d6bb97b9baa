#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "voxmc/fluence.hpp"
#include "voxmc/rng.hpp"

using namespace voxmc;

namespace {

constexpr VoxelIndex kDims{60, 60, 60};
constexpr std::uint64_t kPhotons = 100'000'000;

void deposit_loop(FluenceMap& map, std::uint64_t seed) {
  RngStream rng(seed, 0);
  const std::size_t cells = map.voxel_count();
  for (int i = 0; i < 1 << 16; ++i) {
    const std::size_t cell = static_cast<std::size_t>(rng.next_u64() % cells);
    map.deposit(cell, 1e-4);
  }
}

void BM_DepositPrivate(benchmark::State& state) {
  FluenceMap map(kDims, kPhotons, AccumulationMode::PrivateMerge);
  for (auto _ : state) deposit_loop(map, 1);
  state.SetItemsProcessed(state.iterations() * (1 << 16));
}

void BM_DepositAtomic(benchmark::State& state) {
  FluenceMap map(kDims, kPhotons, AccumulationMode::SharedAtomic);
  for (auto _ : state) deposit_loop(map, 1);
  state.SetItemsProcessed(state.iterations() * (1 << 16));
}

void BM_Merge(benchmark::State& state) {
  std::vector<FluenceMap> parts;
  for (int t = 0; t < 8; ++t) {
    parts.emplace_back(kDims, kPhotons);
    deposit_loop(parts.back(), static_cast<std::uint64_t>(t));
  }
  for (auto _ : state) {
    FluenceMap merged = merge(parts);
    benchmark::DoNotOptimize(merged.raw_cell(0));
  }
}

}  // namespace

BENCHMARK(BM_DepositPrivate);
BENCHMARK(BM_DepositAtomic);
BENCHMARK(BM_Merge);
BENCHMARK_MAIN();
