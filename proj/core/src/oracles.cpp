#include "voxmc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace voxmc {
namespace oracles {

DiffusionParams DiffusionParams::from(double mua, double musp) {
  if (!(mua > 0.0) || !(musp > 0.0)) {
    throw ValidationError("DiffusionParams: mua and musp must be > 0");
  }
  DiffusionParams p;
  p.mua = mua;
  p.musp = musp;
  p.D = 1.0 / (3.0 * (mua + musp));
  p.mueff = std::sqrt(3.0 * mua * (mua + musp));
  return p;
}

double diffusion_infinite_cw(double r_mm, const DiffusionParams& params) {
  if (!(r_mm > 0.0)) throw NonPositiveRadius("diffusion_infinite_cw: r must be > 0");
  constexpr double kPi = 3.14159265358979323846;
  return std::exp(-params.mueff * r_mm) / (4.0 * kPi * params.D * r_mm);
}

namespace {

struct SearchState {
  std::span<const DeviceProfile> devices;
  std::uint64_t total;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> best_counts;
  std::vector<std::uint64_t> counts;
};

double finish_time(const DeviceProfile& d, std::uint64_t n) {
  return n == 0 ? 0.0 : d.a * static_cast<double>(n) + d.t0;
}

// Depth-first enumeration of all compositions; branches whose partial
// makespan already meets the incumbent cannot improve and are skipped.
void enumerate(SearchState& s, std::size_t device, std::uint64_t remaining, double current_max) {
  if (current_max >= s.best) return;
  if (device == s.devices.size() - 1) {
    const double t = finish_time(s.devices[device], remaining);
    const double m = std::max(current_max, t);
    if (m < s.best) {
      s.best = m;
      s.counts[device] = remaining;
      s.best_counts = s.counts;
    }
    return;
  }
  for (std::uint64_t n = 0; n <= remaining; ++n) {
    const double t = finish_time(s.devices[device], n);
    if (t >= s.best) break;  // finish time is increasing in n
    s.counts[device] = n;
    enumerate(s, device + 1, remaining - n, std::max(current_max, t));
  }
  s.counts[device] = 0;
}

}  // namespace

BruteForceResult brute_force_partition(std::uint64_t total,
                                       std::span<const DeviceProfile> devices) {
  if (devices.empty()) throw ValidationError("brute_force_partition: no devices");
  if (total > 5000 || devices.size() > 4) {
    throw InstanceTooLarge("brute_force_partition: limited to total <= 5000, <= 4 devices");
  }
  for (const DeviceProfile& d : devices) {
    if (!(d.a > 0.0) || d.t0 < 0.0) {
      throw ValidationError("brute_force_partition: need a > 0, t0 >= 0");
    }
  }
  SearchState s{devices, total};
  s.counts.assign(devices.size(), 0);
  // Incumbent: everything on the best solo device.
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const double t = finish_time(devices[i], total);
    if (t < s.best) {
      s.best = t;
      s.best_counts.assign(devices.size(), 0);
      s.best_counts[i] = total;
    }
  }
  enumerate(s, 0, total, 0.0);
  return BruteForceResult{Partition{std::move(s.best_counts)}, s.best};
}

std::vector<std::pair<VoxelIndex, double>> raymarch_pathlength(const Vec3& origin,
                                                               const Vec3& direction,
                                                               const VoxelGrid& grid,
                                                               double step) {
  if (!(step > 0.0) || step > 1e-3 * grid.voxel_size()) {
    throw ValidationError("raymarch_pathlength: need 0 < step <= 1e-3 * voxel_size");
  }
  const Vec3 dir = direction.normalized();
  const double diag = grid.voxel_size() * std::sqrt(static_cast<double>(grid.nx()) * grid.nx() +
                                                    static_cast<double>(grid.ny()) * grid.ny() +
                                                    static_cast<double>(grid.nz()) * grid.nz());
  std::vector<std::pair<VoxelIndex, double>> lengths;
  bool entered = false;
  const std::uint64_t samples = static_cast<std::uint64_t>(std::ceil(2.0 * diag / step)) + 2;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * step;
    const Vec3 p = origin + dir * t;
    const auto v = grid.voxel_of(p);
    if (!v) {
      if (entered) break;
      continue;
    }
    entered = true;
    if (!lengths.empty() && lengths.back().first == *v) {
      lengths.back().second += step;
    } else {
      lengths.emplace_back(*v, step);
    }
  }
  return lengths;
}

}  // namespace oracles
}  // namespace voxmc
