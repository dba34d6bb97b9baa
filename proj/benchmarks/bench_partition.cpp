#include <benchmark/benchmark.h>

#include <vector>

#include "voxmc/scheduler.hpp"

using namespace voxmc;

namespace {

std::vector<DeviceProfile> roster(int k) {
  std::vector<DeviceProfile> devs;
  for (int i = 0; i < k; ++i) {
    DeviceProfile d;
    d.name = "d" + std::to_string(i);
    d.cores = 512 << (i % 3);
    d.a = 5e-5 * (1 + i % 4);
    d.t0 = 50.0 + 100.0 * (i % 5);
    devs.push_back(d);
  }
  return devs;
}

void BM_PartitionS2(benchmark::State& state) {
  auto devs = roster(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(partition_s2(100'000'000, devs));
  }
}

void BM_PartitionS3(benchmark::State& state) {
  auto devs = roster(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(partition_s3(100'000'000, devs));
  }
}

}  // namespace

BENCHMARK(BM_PartitionS2)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(BM_PartitionS3)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK_MAIN();
