#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voxmc/scheduler.hpp"
#include "voxmc/types.hpp"

namespace voxmc {
namespace oracles {

/// Derived diffusion quantities for a homogeneous medium.
struct DiffusionParams {
  double mua = 0.0;
  double musp = 0.0;   // reduced scattering mus*(1-g), 1/mm
  double D = 0.0;      // 1/(3(mua+musp)), mm
  double mueff = 0.0;  // sqrt(3*mua*(mua+musp)), 1/mm

  static DiffusionParams from(double mua, double musp);
};

/// Infinite-medium CW point-source Green's function
/// Phi(r) = exp(-mueff*r) / (4*pi*D*r). Throws NonPositiveRadius.
double diffusion_infinite_cw(double r_mm, const DiffusionParams& params);

struct BruteForceResult {
  Partition partition;
  double makespan = 0.0;
};

/// Exhaustive minimum-makespan partition (enumeration with a running upper
/// bound). Limited to total <= 5000 and <= 4 devices; throws
/// InstanceTooLarge beyond that.
BruteForceResult brute_force_partition(std::uint64_t total, std::span<const DeviceProfile> devices);

/// Fine-step ray march accumulating path length per visited voxel;
/// traversal ground truth with O(step) accuracy. Requires
/// step <= 1e-3 * voxel_size.
std::vector<std::pair<VoxelIndex, double>> raymarch_pathlength(const Vec3& origin,
                                                               const Vec3& direction,
                                                               const VoxelGrid& grid, double step);

}  // namespace oracles
}  // namespace voxmc
