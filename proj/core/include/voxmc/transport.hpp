#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "voxmc/fluence.hpp"
#include "voxmc/rng.hpp"
#include "voxmc/types.hpp"

namespace voxmc {

/// One random walker. `voxel` is authoritative while the photon stands
/// exactly on a voxel face; `inv_direction` caches 1/direction per axis and
/// is refreshed whenever the direction changes.
struct PhotonState {
  Vec3 position;
  Vec3 direction;
  Vec3 inv_direction;
  double weight = 1.0;
  double time_ns = 0.0;
  double remaining_scat = 0.0;  // dimensionless scattering lengths left
  std::uint8_t medium = 0;
  VoxelIndex voxel;

  void set_direction(const Vec3& d);
};

enum class StepKind { Scattered, CrossedVoxel, ExitedDomain, Reflected, Terminated };

struct StepOutcome {
  StepKind kind = StepKind::Terminated;
  double deposited = 0.0;
  // Face description when the step ended on a refractive-index mismatch or
  // the domain boundary; handle_interface consumes it.
  bool interface_pending = false;
  int face_axis = -1;
  int face_step = 0;
  VoxelIndex next_voxel;
  bool next_is_exterior = false;
};

/// Places the photon 1e-6 mm inside the domain along its launch direction
/// with unit weight. Throws SourceOutsideDomain.
PhotonState launch(const Source& source, const VoxelGrid& grid, RngStream& stream);

/// Smallest positive distance to a bounding plane of the voxel containing
/// `position` (zero direction components contribute infinity).
double distance_to_voxel_boundary(const Vec3& position, const Vec3& direction,
                                  const VoxelGrid& grid);

/// Henyey-Greenstein inverse CDF: cos(theta) for uniform deviate xi
/// (isotropic branch for |g| < 1e-6).
double hg_cos_theta(double g, double xi);

/// Henyey-Greenstein deflection: inverse-CDF cos(theta) (isotropic branch for
/// |g| < 1e-6), uniform azimuth, rotated into the frame of `direction`.
Vec3 hg_scatter(const Vec3& direction, double g, RngStream& stream);

/// Unpolarized Fresnel reflectance for incidence cosine cos_i; returns 1 for
/// total internal reflection.
double fresnel_reflectance(double n1, double n2, double cos_i);

/// Moves the photon min(boundary, scattering, time-horizon) distance,
/// depositing absorbed weight continuously (Beer-Lambert). Scatters in place
/// when the scattering length runs out first; lands exactly on the face
/// otherwise. Same-index face crossings are resolved inline; mismatches and
/// the domain boundary are returned with interface_pending set.
StepOutcome advance(PhotonState& photon, const VoxelGrid& grid, const SimulationConfig& config,
                    RngStream& stream);

/// Resolves a pending interface: pass-through when n1 == n2, deterministic
/// total internal reflection, otherwise one Fresnel draw deciding specular
/// reflection vs Snell refraction. ExitedDomain when the photon leaves the
/// grid (always, in TerminateAtBoundary mode; after refracting out, in
/// ReflectAtMismatch mode).
StepOutcome handle_interface(PhotonState& photon, const VoxelGrid& grid,
                             const SimulationConfig& config, const StepOutcome& crossing,
                             RngStream& stream);

/// Russian roulette for weight < threshold: survive with probability 1/m at
/// m-fold weight, die otherwise. Returns false when the photon was killed.
bool roulette(PhotonState& photon, const SimulationConfig& config, RngStream& stream);

/// Terminal bookkeeping of one photon, in launched-weight units. `killed` is
/// the net roulette balance (residual weight of killed photons minus the
/// boost credited to survivors), so that
/// deposited + escaped + killed + truncated == 1 exactly per photon.
struct PhotonDisposition {
  double deposited = 0.0;
  double escaped = 0.0;
  double killed = 0.0;
  double truncated = 0.0;

  PhotonDisposition& operator+=(const PhotonDisposition& o) {
    deposited += o.deposited;
    escaped += o.escaped;
    killed += o.killed;
    truncated += o.truncated;
    return *this;
  }
};

/// Full walk of photon `photon_index`: derives its RNG stream from
/// (config.master_seed, photon_index), launches, and iterates
/// advance/handle_interface/roulette until termination. Deposits go to `map`.
PhotonDisposition simulate_photon(std::uint64_t photon_index, const Scene& scene,
                                  const SimulationConfig& config, FluenceMap& map);

/// Same walk, but returns the per-voxel deposit list (test support).
PhotonDisposition simulate_photon_trace(std::uint64_t photon_index, const Scene& scene,
                                        const SimulationConfig& config,
                                        std::vector<std::pair<VoxelIndex, double>>& deposits);

}  // namespace voxmc
