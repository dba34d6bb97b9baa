#include "voxmc/types.hpp"

#include <cmath>

namespace voxmc {

VoxelGrid::VoxelGrid(VoxelIndex dims, double voxel_size_mm, std::vector<std::uint8_t> labels,
                     std::vector<OpticalProperties> media)
    : dims_(dims), h_(voxel_size_mm), labels_(std::move(labels)), media_(std::move(media)) {
  if (dims_.x < 1 || dims_.y < 1 || dims_.z < 1) {
    throw ValidationError("VoxelGrid: all dims must be >= 1");
  }
  if (!(h_ > 0.0)) {
    throw ValidationError("VoxelGrid: voxel_size must be > 0");
  }
  const std::size_t expected = static_cast<std::size_t>(dims_.x) * dims_.y * dims_.z;
  if (labels_.size() != expected) {
    throw ValidationError("VoxelGrid: label array size does not match dims");
  }
  if (media_.empty()) {
    throw ValidationError("VoxelGrid: media list is empty");
  }
  for (const auto& m : media_) {
    if (m.mua < 0.0 || m.mus < 0.0 || m.g < -1.0 || m.g > 1.0 || m.n < 1.0) {
      throw ValidationError("VoxelGrid: invalid optical properties");
    }
  }
  for (const std::uint8_t l : labels_) {
    if (l >= media_.size()) {
      throw ValidationError("VoxelGrid: label exceeds media list");
    }
  }
}

std::optional<VoxelIndex> VoxelGrid::voxel_of(const Vec3& p) const {
  const int ix = static_cast<int>(std::floor(p.x / h_));
  const int iy = static_cast<int>(std::floor(p.y / h_));
  const int iz = static_cast<int>(std::floor(p.z / h_));
  const VoxelIndex v{ix, iy, iz};
  if (!contains(v)) return std::nullopt;
  return v;
}

void SimulationConfig::validate() const {
  if (photon_count < 1) throw ValidationError("photon_count must be >= 1");
  if (!(tmax_ns > 0.0)) throw ValidationError("tmax must be > 0");
  if (!(roulette_threshold > 0.0 && roulette_threshold < 1.0)) {
    throw ValidationError("roulette_threshold must be in (0, 1)");
  }
  if (roulette_multiplier < 2) throw ValidationError("roulette_multiplier must be >= 2");
  if (workgroup_size < 1) throw ValidationError("workgroup_size must be >= 1");
}

namespace {

VoxelGrid make_benchmark_grid(bool with_sphere) {
  const VoxelIndex dims{60, 60, 60};
  const double h = 1.0;
  std::vector<OpticalProperties> media;
  media.push_back({0.0, 0.0, 0.0, 1.0});        // exterior: air
  media.push_back({0.005, 1.0, 0.01, 1.37});    // background
  std::vector<std::uint8_t> labels(60u * 60u * 60u, 1);
  if (with_sphere) {
    media.push_back({0.002, 5.0, 0.9, 1.0});  // spherical inclusion
    const Vec3 center{30.0, 30.0, 30.0};
    const double r2 = 15.0 * 15.0;
    std::size_t i = 0;
    for (int z = 0; z < 60; ++z) {
      for (int y = 0; y < 60; ++y) {
        for (int x = 0; x < 60; ++x, ++i) {
          const Vec3 c{(x + 0.5) * h, (y + 0.5) * h, (z + 0.5) * h};
          const Vec3 d = c - center;
          if (d.dot(d) <= r2) labels[i] = 2;
        }
      }
    }
  }
  return VoxelGrid(dims, h, std::move(labels), std::move(media));
}

}  // namespace

BenchmarkSetup benchmark_preset(Benchmark name) {
  const bool sphere = name != Benchmark::B1;
  SimulationConfig config;
  config.photon_count = 100'000'000;
  config.boundary_mode =
      sphere ? BoundaryMode::ReflectAtMismatch : BoundaryMode::TerminateAtBoundary;
  config.accumulation_mode = name == Benchmark::B2a ? AccumulationMode::SharedAtomic
                                                    : AccumulationMode::PrivateMerge;
  Source source;
  source.position = {30.0, 30.0, 0.0};
  source.direction = {0.0, 0.0, 1.0};
  return BenchmarkSetup{make_benchmark_grid(sphere), source, config};
}

std::optional<Benchmark> benchmark_from_name(std::string_view name) {
  if (name == "B1" || name == "b1") return Benchmark::B1;
  if (name == "B2" || name == "b2") return Benchmark::B2;
  if (name == "B2a" || name == "b2a" || name == "B2A") return Benchmark::B2a;
  return std::nullopt;
}

std::string_view benchmark_name(Benchmark b) {
  switch (b) {
    case Benchmark::B1: return "B1";
    case Benchmark::B2: return "B2";
    case Benchmark::B2a: return "B2a";
  }
  return "?";
}

}  // namespace voxmc
