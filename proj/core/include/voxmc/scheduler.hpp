#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxmc/fluence.hpp"
#include "voxmc/transport.hpp"
#include "voxmc/types.hpp"

namespace voxmc {

enum class DeviceKind { RealWorkerPool, Simulated };

/// Capacity description of one compute device. Simulated devices execute the
/// physics on host threads but report wall time from the linear runtime
/// model T = a*n + t0 (ms), which is what the partitioning strategies study.
struct DeviceProfile {
  std::string name;
  int cores = 1;
  double a = 0.0;   // ms per photon
  double t0 = 0.0;  // ms startup overhead
  DeviceKind kind = DeviceKind::Simulated;
  double jitter_sigma = 0.0;  // multiplicative lognormal noise on pilot timings
};

struct Partition {
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
};

enum class Strategy { S1, S2, S3 };

std::optional<Strategy> strategy_from_name(std::string_view name);
std::string_view strategy_name(Strategy s);

/// Worker-pool sizing: cores x max concurrent threads per core.
int thread_count_heuristic(int cores, int max_concurrent_per_core);

/// Photons proportional to core counts (largest-remainder rounding,
/// lower-index tie break).
Partition partition_s1(std::uint64_t total, std::span<const DeviceProfile> devices);

/// Photons proportional to throughput 1/a.
Partition partition_s2(std::uint64_t total, std::span<const DeviceProfile> devices);

/// Minimax partition: minimizes max_i(a_i*n_i + t0_i*[n_i>0]). Exact for the
/// integer problem: per device subset, the equal-finish-time point is found
/// by bisection and refined by a +-1 exchange pass; the best subset wins.
Partition partition_s3(std::uint64_t total, std::span<const DeviceProfile> devices);

Partition make_partition(std::uint64_t total, std::span<const DeviceProfile> devices, Strategy s);

/// Model-evaluated makespan of a partition (t0 charged only to devices with
/// nonzero assignment).
double model_makespan(const Partition& p, std::span<const DeviceProfile> devices);

/// Shared remaining-photon quota; claim() atomically decrements while
/// positive and reports the claimed index offset, in claim order.
class GroupCounter {
 public:
  explicit GroupCounter(std::uint64_t quota) : remaining_(static_cast<std::int64_t>(quota)), quota_(quota) {}

  std::optional<std::uint64_t> claim() {
    std::int64_t old = remaining_.load(std::memory_order_relaxed);
    while (old > 0) {
      if (remaining_.compare_exchange_weak(old, old - 1, std::memory_order_relaxed)) {
        return quota_ - static_cast<std::uint64_t>(old);
      }
    }
    return std::nullopt;
  }

  std::uint64_t remaining() const {
    const std::int64_t r = remaining_.load(std::memory_order_relaxed);
    return r > 0 ? static_cast<std::uint64_t>(r) : 0;
  }

 private:
  std::atomic<std::int64_t> remaining_;
  std::uint64_t quota_;
};

struct GroupRunResult {
  FluenceMap map;
  PhotonDisposition totals;
  std::vector<std::uint64_t> per_thread_photons;
  double wall_ms = 0.0;
};

/// Threads repeatedly claim the next photon index from a shared counter
/// until the quota is exhausted (workgroup-level dynamic balancing). Photon
/// indices are global: [first_index, first_index + quota).
GroupRunResult run_group_dynamic(std::uint64_t first_index, std::uint64_t quota, int threads,
                                 const Scene& scene, const SimulationConfig& config);

/// Static baseline: contiguous pre-assigned blocks of ceil(quota/threads).
GroupRunResult run_static_split(std::uint64_t first_index, std::uint64_t quota, int threads,
                                const Scene& scene, const SimulationConfig& config);

/// Makespan of replaying a fixed per-photon cost sequence under static
/// contiguous blocks.
double static_split_makespan(std::span<const double> costs, int threads);

/// Same sequence under dynamic claiming (each thread takes the next photon
/// the moment it goes idle).
double dynamic_makespan(std::span<const double> costs, int threads);

struct Calibration {
  double a = 0.0;
  double t0 = 0.0;
};

/// Two-pilot-run estimate of the runtime model: a = (T2-T1)/(n2-n1),
/// t0 = max(0, T1 - a*n1). Simulated devices answer from their model plus
/// optional lognormal noise (seeded by noise_seed); real devices are timed.
/// Throws NonPositiveSlope when T2 <= T1.
Calibration calibrate(const DeviceProfile& device, std::uint64_t n1, std::uint64_t n2,
                      const Scene& scene, const SimulationConfig& config, int threads,
                      std::uint64_t noise_seed = 0);

struct DeviceRunResult {
  std::string name;
  std::uint64_t photons = 0;
  double wall_ms = 0.0;
};

struct MultiDeviceResult {
  FluenceMap map;
  PhotonDisposition totals;
  Partition partition;
  std::vector<DeviceRunResult> devices;
  double makespan_ms = 0.0;
};

/// Partitions [0, total) into contiguous per-device ranges (per-photon RNG
/// keeps the merged physics identical for every partition), runs all devices
/// concurrently, and merges the maps in device order.
MultiDeviceResult run_multi_device(std::uint64_t total, std::span<const DeviceProfile> devices,
                                   Strategy strategy, const Scene& scene,
                                   const SimulationConfig& config, int threads_per_device);

}  // namespace voxmc
