#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "voxmc/errors.hpp"

namespace voxmc {

/// Speed of light in vacuum, mm per ns.
inline constexpr double kLightSpeedMmPerNs = 299.792458;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double inv = 1.0 / norm();
    return {x * inv, y * inv, z * inv};
  }
  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& ref(int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// Per-medium optical coefficients: absorption and scattering in 1/mm,
/// Henyey-Greenstein anisotropy g, refractive index n.
struct OpticalProperties {
  double mua = 0.0;
  double mus = 0.0;
  double g = 0.0;
  double n = 1.0;

  bool operator==(const OpticalProperties&) const = default;
};

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  bool operator==(const VoxelIndex&) const = default;
};

/// Labeled 3-D voxel volume. Label 0 is reserved for the exterior medium and
/// never appears in the grid itself; interior voxels carry labels >= 1.
class VoxelGrid {
 public:
  VoxelGrid(VoxelIndex dims, double voxel_size_mm, std::vector<std::uint8_t> labels,
            std::vector<OpticalProperties> media);

  VoxelIndex dims() const { return dims_; }
  int nx() const { return dims_.x; }
  int ny() const { return dims_.y; }
  int nz() const { return dims_.z; }
  double voxel_size() const { return h_; }
  std::size_t voxel_count() const { return labels_.size(); }

  std::size_t linear(const VoxelIndex& v) const {
    return static_cast<std::size_t>(v.x) +
           static_cast<std::size_t>(dims_.x) *
               (static_cast<std::size_t>(v.y) + static_cast<std::size_t>(dims_.y) * v.z);
  }
  bool contains(const VoxelIndex& v) const {
    return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < dims_.x && v.y < dims_.y && v.z < dims_.z;
  }
  std::uint8_t label(const VoxelIndex& v) const { return labels_[linear(v)]; }
  const OpticalProperties& medium(std::uint8_t lbl) const { return media_[lbl]; }
  const OpticalProperties& medium_at(const VoxelIndex& v) const { return media_[label(v)]; }
  const OpticalProperties& exterior() const { return media_[0]; }
  const std::vector<OpticalProperties>& media() const { return media_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  /// Maps a position (mm) to its voxel; nullopt when outside the grid
  /// (lower bound inclusive, upper bound exclusive).
  std::optional<VoxelIndex> voxel_of(const Vec3& p) const;

 private:
  VoxelIndex dims_;
  double h_;
  std::vector<std::uint8_t> labels_;
  std::vector<OpticalProperties> media_;
};

enum class AccumulationMode { SharedAtomic, PrivateMerge };
enum class BoundaryMode { TerminateAtBoundary, ReflectAtMismatch };

struct SimulationConfig {
  std::uint64_t photon_count = 100'000'000;
  std::uint64_t master_seed = 0;
  AccumulationMode accumulation_mode = AccumulationMode::PrivateMerge;
  BoundaryMode boundary_mode = BoundaryMode::TerminateAtBoundary;
  double tmax_ns = 5.0;
  double roulette_threshold = 1e-4;
  int roulette_multiplier = 10;
  int workgroup_size = 64;

  void validate() const;
};

/// Point source. Pencil sources launch along `direction`; isotropic sources
/// draw the launch direction uniformly over the sphere (test/validation use).
struct Source {
  Vec3 position;
  Vec3 direction{0.0, 0.0, 1.0};
  bool isotropic = false;
};

struct Scene {
  VoxelGrid grid;
  Source source;
};

enum class Benchmark { B1, B2, B2a };

struct BenchmarkSetup {
  VoxelGrid grid;
  Source source;
  SimulationConfig config;
};

/// The three benchmark configurations: a 60x60x60 mm cube of turbid medium
/// (mua=0.005, mus=1.0, g=0.01, n=1.37) probed by a pencil beam entering at
/// (30,30,0) mm along +z. B2/B2a add a 15 mm radius spherical inclusion
/// (mua=0.002, mus=5.0, g=0.9, n=1.0) at the cube center and switch boundary
/// handling from terminate-on-exit to Fresnel reflection.
BenchmarkSetup benchmark_preset(Benchmark name);

std::optional<Benchmark> benchmark_from_name(std::string_view name);
std::string_view benchmark_name(Benchmark b);

}  // namespace voxmc
