#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "voxmc/fluence.hpp"
#include "voxmc/types.hpp"

namespace voxmc {

/// 64-bit FNV-1a over a byte stream.
std::uint64_t fnv1a64(std::span<const std::byte> bytes);
std::uint64_t fnv1a64(const void* data, std::size_t size);

/// Writes the map as headerless little-endian float32, x-fastest ordering,
/// plus a "<path>.json" sidecar carrying dims, voxel size, photon count,
/// normalization flag, seed and an FNV-1a checksum of the byte stream.
void write_volume(const FluenceMap& map, double voxel_size_mm, std::uint64_t seed,
                  const std::filesystem::path& path);

struct VolumeData {
  std::vector<float> values;
  VoxelIndex dims;
  double voxel_size_mm = 0.0;
  std::uint64_t photon_count = 0;
  std::uint64_t seed = 0;
  bool normalized = false;
  std::uint64_t checksum = 0;
};

/// Reads a volume written by write_volume, verifying the sidecar checksum.
VolumeData read_volume(const std::filesystem::path& path);

}  // namespace voxmc
