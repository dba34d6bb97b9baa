#include "voxmc/volume_io.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "volume files are little-endian; big-endian hosts need byte swaps");

namespace voxmc {

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const std::byte b : bytes) {
    hash ^= static_cast<std::uint64_t>(b);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  return fnv1a64(std::span<const std::byte>(static_cast<const std::byte*>(data), size));
}

void write_volume(const FluenceMap& map, double voxel_size_mm, std::uint64_t seed,
                  const std::filesystem::path& path) {
  const std::vector<float> volume = map.to_float_volume();
  const std::size_t bytes = volume.size() * sizeof(float);
  const std::uint64_t checksum = fnv1a64(volume.data(), bytes);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_volume: cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(volume.data()), static_cast<std::streamsize>(bytes));
    if (!out) throw IoError("write_volume: write failed for " + path.string());
  }

  nlohmann::json sidecar = {
      {"dims", {map.dims().x, map.dims().y, map.dims().z}},
      {"voxel_size_mm", voxel_size_mm},
      {"photon_count", map.photon_count()},
      {"normalized", map.normalized()},
      {"seed", seed},
      {"checksum", checksum},
      {"ordering", "x-fastest"},
  };
  std::filesystem::path side = path;
  side += ".json";
  std::ofstream out(side, std::ios::trunc);
  if (!out) throw IoError("write_volume: cannot open " + side.string());
  out << sidecar.dump(2) << "\n";
}

VolumeData read_volume(const std::filesystem::path& path) {
  std::filesystem::path side = path;
  side += ".json";
  std::ifstream sin(side);
  if (!sin) throw IoError("read_volume: missing sidecar " + side.string());
  nlohmann::json sidecar;
  try {
    sin >> sidecar;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("read_volume: bad sidecar: ") + e.what());
  }

  VolumeData data;
  data.dims = {sidecar.at("dims").at(0).get<int>(), sidecar.at("dims").at(1).get<int>(),
               sidecar.at("dims").at(2).get<int>()};
  data.voxel_size_mm = sidecar.at("voxel_size_mm").get<double>();
  data.photon_count = sidecar.at("photon_count").get<std::uint64_t>();
  data.normalized = sidecar.at("normalized").get<bool>();
  data.seed = sidecar.at("seed").get<std::uint64_t>();
  data.checksum = sidecar.at("checksum").get<std::uint64_t>();

  const std::size_t count = static_cast<std::size_t>(data.dims.x) * data.dims.y * data.dims.z;
  data.values.resize(count);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_volume: cannot open " + path.string());
  in.read(reinterpret_cast<char*>(data.values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) {
    throw IoError("read_volume: short read from " + path.string());
  }
  if (fnv1a64(data.values.data(), count * sizeof(float)) != data.checksum) {
    throw IoError("read_volume: checksum mismatch for " + path.string());
  }
  return data;
}

}  // namespace voxmc
