#include "voxmc/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <queue>
#include <thread>

namespace voxmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::uint64_t Partition::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "s1" || name == "S1") return Strategy::S1;
  if (name == "s2" || name == "S2") return Strategy::S2;
  if (name == "s3" || name == "S3") return Strategy::S3;
  return std::nullopt;
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::S1: return "s1";
    case Strategy::S2: return "s2";
    case Strategy::S3: return "s3";
  }
  return "?";
}

int thread_count_heuristic(int cores, int max_concurrent_per_core) {
  if (cores < 1 || max_concurrent_per_core < 1) {
    throw ValidationError("thread_count_heuristic: arguments must be >= 1");
  }
  return cores * max_concurrent_per_core;
}

namespace {

/// Largest-remainder apportionment of `total` over nonnegative weights;
/// remainder units go to the largest fractional parts, lower index first.
Partition proportional_partition(std::uint64_t total, std::span<const double> weights) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(wsum > 0.0)) throw ValidationError("partition: weights must sum to > 0");
  const std::size_t k = weights.size();
  Partition p;
  p.counts.assign(k, 0);
  std::vector<double> frac(k);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double share = static_cast<double>(total) * weights[i] / wsum;
    const double fl = std::floor(share);
    p.counts[i] = static_cast<std::uint64_t>(fl);
    frac[i] = share - fl;
    assigned += p.counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; assigned < total; ++j) {
    ++p.counts[order[j % k]];
    ++assigned;
  }
  return p;
}

}  // namespace

Partition partition_s1(std::uint64_t total, std::span<const DeviceProfile> devices) {
  if (devices.empty()) throw ValidationError("partition: no devices");
  std::vector<double> w(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].cores < 1) throw ValidationError("partition_s1: cores must be >= 1");
    w[i] = static_cast<double>(devices[i].cores);
  }
  return proportional_partition(total, w);
}

Partition partition_s2(std::uint64_t total, std::span<const DeviceProfile> devices) {
  if (devices.empty()) throw ValidationError("partition: no devices");
  std::vector<double> w(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (!(devices[i].a > 0.0)) throw ValidationError("partition_s2: slope a must be > 0");
    w[i] = 1.0 / devices[i].a;
  }
  return proportional_partition(total, w);
}

double model_makespan(const Partition& p, std::span<const DeviceProfile> devices) {
  double makespan = 0.0;
  for (std::size_t i = 0; i < p.counts.size() && i < devices.size(); ++i) {
    if (p.counts[i] == 0) continue;
    makespan = std::max(makespan,
                        devices[i].a * static_cast<double>(p.counts[i]) + devices[i].t0);
  }
  return makespan;
}

namespace {

/// Exact minimax allocation for one device support set: bisect the smallest
/// finish time T whose capacities floor((T - t0_i)/a_i) cover the total,
/// allocate within those capacities, then run a +-1 exchange pass to
/// fixpoint as a rounding safety net.
bool solve_support(std::uint64_t total, std::span<const DeviceProfile> devices,
                   const std::vector<std::size_t>& support, std::vector<std::uint64_t>& counts,
                   double& makespan) {
  const auto cap_at = [&](double t, std::size_t i) -> std::uint64_t {
    const DeviceProfile& d = devices[i];
    const double c = std::floor((t - d.t0) / d.a + 1e-9);
    if (c <= 0.0) return 0;
    return static_cast<std::uint64_t>(std::min(c, static_cast<double>(total)));
  };
  const auto coverage = [&](double t) {
    std::uint64_t sum = 0;
    for (const std::size_t i : support) sum += cap_at(t, i);
    return sum;
  };

  double hi = kInf;
  for (const std::size_t i : support) {
    hi = std::min(hi, devices[i].a * static_cast<double>(total) + devices[i].t0);
  }
  double lo = 0.0;
  if (coverage(lo) >= total) {
    // degenerate (total == 0)
    counts.assign(devices.size(), 0);
    makespan = 0.0;
    return true;
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-9 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (coverage(mid) >= total) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  counts.assign(devices.size(), 0);
  std::uint64_t assigned = 0;
  for (const std::size_t i : support) {
    counts[i] = cap_at(hi, i);
    assigned += counts[i];
  }
  if (assigned < total) return false;  // numerical corner; another support will cover
  // Shed the surplus from whichever device currently finishes last.
  std::uint64_t surplus = assigned - total;
  while (surplus > 0) {
    std::size_t worst = support[0];
    double worst_t = -1.0;
    for (const std::size_t i : support) {
      if (counts[i] == 0) continue;
      const double t = devices[i].a * static_cast<double>(counts[i]) + devices[i].t0;
      if (t > worst_t) {
        worst_t = t;
        worst = i;
      }
    }
    --counts[worst];
    --surplus;
  }

  const auto eval = [&]() {
    double m = 0.0;
    for (const std::size_t i : support) {
      if (counts[i] == 0) continue;
      m = std::max(m, devices[i].a * static_cast<double>(counts[i]) + devices[i].t0);
    }
    return m;
  };

  makespan = eval();
  for (int pass = 0; pass < 4096; ++pass) {
    bool improved = false;
    for (const std::size_t from : support) {
      if (counts[from] == 0) continue;
      for (const std::size_t to : support) {
        if (to == from) continue;
        --counts[from];
        ++counts[to];
        const double m = eval();
        if (m < makespan - 1e-12 * std::max(1.0, makespan)) {
          makespan = m;
          improved = true;
        } else {
          ++counts[from];
          --counts[to];
        }
      }
    }
    if (!improved) break;
  }
  return true;
}

}  // namespace

Partition partition_s3(std::uint64_t total, std::span<const DeviceProfile> devices) {
  if (devices.empty()) throw ValidationError("partition: no devices");
  for (const DeviceProfile& d : devices) {
    if (!(d.a > 0.0) || d.t0 < 0.0) throw ValidationError("partition_s3: need a > 0, t0 >= 0");
  }
  const std::size_t k = devices.size();
  Partition best;
  best.counts.assign(k, 0);
  if (total == 0) return best;

  double best_makespan = kInf;
  std::vector<std::uint64_t> counts;
  double makespan;

  if (k <= 16) {
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask & (1u << i)) support.push_back(i);
      }
      if (!solve_support(total, devices, support, counts, makespan)) continue;
      if (makespan < best_makespan) {
        best_makespan = makespan;
        best.counts = counts;
      }
    }
  } else {
    std::vector<std::size_t> support(k);
    std::iota(support.begin(), support.end(), 0);
    if (!solve_support(total, devices, support, counts, makespan)) {
      throw ValidationError("partition_s3: infeasible instance");
    }
    best.counts = counts;
  }
  return best;
}

Partition make_partition(std::uint64_t total, std::span<const DeviceProfile> devices, Strategy s) {
  switch (s) {
    case Strategy::S1: return partition_s1(total, devices);
    case Strategy::S2: return partition_s2(total, devices);
    case Strategy::S3: return partition_s3(total, devices);
  }
  throw ValidationError("unknown strategy");
}

namespace {

GroupRunResult run_group(std::uint64_t first_index, std::uint64_t quota, int threads,
                         const Scene& scene, const SimulationConfig& config, bool dynamic) {
  if (threads < 1) throw ValidationError("run_group: threads must be >= 1");
  config.validate();

  const bool shared = config.accumulation_mode == AccumulationMode::SharedAtomic;
  GroupRunResult result{
      FluenceMap(scene.grid.dims(), config.photon_count,
                 shared ? AccumulationMode::SharedAtomic : AccumulationMode::PrivateMerge),
      {},
      std::vector<std::uint64_t>(static_cast<std::size_t>(threads), 0),
      0.0};

  std::vector<FluenceMap> private_maps;
  if (!shared) {
    private_maps.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      private_maps.emplace_back(scene.grid.dims(), config.photon_count,
                                AccumulationMode::PrivateMerge);
    }
  }
  std::vector<PhotonDisposition> per_thread(threads);

  GroupCounter counter(quota);
  const std::uint64_t block = threads > 0 ? (quota + threads - 1) / threads : quota;

  const auto t_start = std::chrono::steady_clock::now();
  {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        FluenceMap& map = shared ? result.map : private_maps[t];
        PhotonDisposition local;
        std::uint64_t tally = 0;
        if (dynamic) {
          while (auto offset = counter.claim()) {
            local += simulate_photon(first_index + *offset, scene, config, map);
            ++tally;
          }
        } else {
          const std::uint64_t begin = std::min(quota, static_cast<std::uint64_t>(t) * block);
          const std::uint64_t end = std::min(quota, begin + block);
          for (std::uint64_t i = begin; i < end; ++i) {
            local += simulate_photon(first_index + i, scene, config, map);
            ++tally;
          }
        }
        per_thread[t] = local;
        result.per_thread_photons[t] = tally;
      });
    }
    for (auto& th : pool) th.join();
  }
  const auto t_end = std::chrono::steady_clock::now();
  result.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();

  if (!shared) {
    for (const FluenceMap& m : private_maps) result.map.add(m);
  }
  for (const PhotonDisposition& d : per_thread) result.totals += d;
  return result;
}

}  // namespace

GroupRunResult run_group_dynamic(std::uint64_t first_index, std::uint64_t quota, int threads,
                                 const Scene& scene, const SimulationConfig& config) {
  return run_group(first_index, quota, threads, scene, config, true);
}

GroupRunResult run_static_split(std::uint64_t first_index, std::uint64_t quota, int threads,
                                const Scene& scene, const SimulationConfig& config) {
  return run_group(first_index, quota, threads, scene, config, false);
}

double static_split_makespan(std::span<const double> costs, int threads) {
  if (threads < 1) throw ValidationError("threads must be >= 1");
  const std::size_t n = costs.size();
  const std::size_t block = (n + threads - 1) / threads;
  double makespan = 0.0;
  for (std::size_t begin = 0; begin < n; begin += block) {
    const std::size_t end = std::min(n, begin + block);
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += costs[i];
    makespan = std::max(makespan, sum);
  }
  return makespan;
}

double dynamic_makespan(std::span<const double> costs, int threads) {
  if (threads < 1) throw ValidationError("threads must be >= 1");
  std::priority_queue<double, std::vector<double>, std::greater<double>> idle;
  for (int t = 0; t < threads; ++t) idle.push(0.0);
  double makespan = 0.0;
  for (const double c : costs) {
    const double t = idle.top();
    idle.pop();
    const double done = t + c;
    makespan = std::max(makespan, done);
    idle.push(done);
  }
  return makespan;
}

Calibration calibrate(const DeviceProfile& device, std::uint64_t n1, std::uint64_t n2,
                      const Scene& scene, const SimulationConfig& config, int threads,
                      std::uint64_t noise_seed) {
  if (!(n2 > n1 && n1 >= 1)) throw ValidationError("calibrate: need n2 > n1 >= 1");
  double t1, t2;
  if (device.kind == DeviceKind::Simulated) {
    t1 = device.a * static_cast<double>(n1) + device.t0;
    t2 = device.a * static_cast<double>(n2) + device.t0;
    if (device.jitter_sigma > 0.0) {
      RngStream noise(noise_seed, 0x706c6f74);
      const auto lognormal = [&]() {
        const double u1 = std::max(noise.next_unit(), 1e-300);
        const double u2 = noise.next_unit();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * 3.14159265358979323846 * u2);
        return std::exp(device.jitter_sigma * z);
      };
      t1 *= lognormal();
      t2 *= lognormal();
    }
  } else {
    SimulationConfig pilot = config;
    pilot.photon_count = n2;  // keeps both pilots on one quantum scale
    t1 = run_group_dynamic(0, n1, threads, scene, pilot).wall_ms;
    t2 = run_group_dynamic(0, n2, threads, scene, pilot).wall_ms;
  }
  if (t2 <= t1) {
    throw NonPositiveSlope("calibrate: T2 <= T1; increase n2 or rerun");
  }
  Calibration cal;
  cal.a = (t2 - t1) / static_cast<double>(n2 - n1);
  cal.t0 = std::max(0.0, t1 - cal.a * static_cast<double>(n1));
  return cal;
}

MultiDeviceResult run_multi_device(std::uint64_t total, std::span<const DeviceProfile> devices,
                                   Strategy strategy, const Scene& scene,
                                   const SimulationConfig& config, int threads_per_device) {
  if (devices.empty()) throw ValidationError("run_multi_device: no devices");
  Partition partition = make_partition(total, devices, strategy);

  struct Slot {
    std::uint64_t first = 0;
    std::uint64_t count = 0;
  };
  std::vector<Slot> slots(devices.size());
  std::uint64_t next = 0;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    slots[i] = {next, partition.counts[i]};
    next += partition.counts[i];
  }

  SimulationConfig run_config = config;
  run_config.photon_count = total;

  std::vector<std::future<GroupRunResult>> futures(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (slots[i].count == 0) continue;
    const DeviceProfile& dev = devices[i];
    int threads = threads_per_device;
    if (threads <= 0) {
      threads = dev.kind == DeviceKind::RealWorkerPool
                    ? thread_count_heuristic(dev.cores, 1)
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    futures[i] = std::async(std::launch::async, [&, i, threads]() {
      return run_group_dynamic(slots[i].first, slots[i].count, threads, scene, run_config);
    });
  }

  MultiDeviceResult result{FluenceMap(scene.grid.dims(), total, AccumulationMode::PrivateMerge),
                           {},
                           std::move(partition),
                           {},
                           0.0};
  for (std::size_t i = 0; i < devices.size(); ++i) {
    DeviceRunResult dr;
    dr.name = devices[i].name;
    dr.photons = slots[i].count;
    if (slots[i].count > 0) {
      GroupRunResult g = futures[i].get();
      dr.wall_ms = devices[i].kind == DeviceKind::Simulated
                       ? devices[i].a * static_cast<double>(slots[i].count) + devices[i].t0
                       : g.wall_ms;
      result.map.add(g.map);
      result.totals += g.totals;
    }
    result.makespan_ms = std::max(result.makespan_ms, dr.wall_ms);
    result.devices.push_back(std::move(dr));
  }
  return result;
}

}  // namespace voxmc
