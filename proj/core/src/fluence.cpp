#include "voxmc/fluence.hpp"

#include <bit>

namespace voxmc {

namespace {

// Power-of-two quantum sized so N photons of unit weight cannot overflow a
// 63-bit cell: 2^(62 - bit_width(N)) counts per unit weight.
double quantum_for(std::uint64_t photon_count) {
  const int bits = 62 - std::bit_width(photon_count | 1);
  return std::ldexp(1.0, -bits);
}

}  // namespace

FluenceMap::FluenceMap(VoxelIndex dims, std::uint64_t photon_count, AccumulationMode mode,
                       bool track_counts)
    : dims_(dims),
      photon_count_(photon_count),
      mode_(mode),
      quantum_(quantum_for(photon_count)),
      inv_quantum_(1.0 / quantum_for(photon_count)),
      cells_(static_cast<std::size_t>(dims.x) * dims.y * dims.z, 0) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    throw ValidationError("FluenceMap: dims must be >= 1");
  }
  if (photon_count < 1) {
    throw ValidationError("FluenceMap: photon_count must be >= 1");
  }
  if (track_counts) counts_.assign(cells_.size(), 0);
}

void FluenceMap::deposit(const VoxelIndex& v, double dw) {
  if (v.x < 0 || v.y < 0 || v.z < 0 || v.x >= dims_.x || v.y >= dims_.y || v.z >= dims_.z) {
    throw VoxelOutOfRange("deposit: voxel outside map");
  }
  if (dw < 0.0) throw ValidationError("deposit: negative weight");
  deposit(static_cast<std::size_t>(v.x) +
              static_cast<std::size_t>(dims_.x) *
                  (static_cast<std::size_t>(v.y) + static_cast<std::size_t>(dims_.y) * v.z),
          dw);
}

double FluenceMap::total_deposited() const {
  std::int64_t sum = 0;
  for (const std::int64_t c : cells_) sum += c;
  return static_cast<double>(sum) * quantum_;
}

void FluenceMap::add(const FluenceMap& other) {
  if (other.dims_ != dims_) throw DimensionMismatch("FluenceMap::add: dims differ");
  if (other.quantum_ != quantum_) throw DimensionMismatch("FluenceMap::add: quantum differs");
  if (normalized_ || other.normalized_) throw AlreadyNormalized("FluenceMap::add: normalized map");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  if (!counts_.empty() && !other.counts_.empty()) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  }
}

void FluenceMap::normalize(const VoxelGrid& grid) {
  if (normalized_) throw AlreadyNormalized("FluenceMap::normalize: already normalized");
  if (grid.dims() != dims_) throw DimensionMismatch("FluenceMap::normalize: grid dims differ");
  const double v_voxel = grid.voxel_size() * grid.voxel_size() * grid.voxel_size();
  values_.resize(cells_.size());
  zero_mua_voxels_ = 0;
  std::size_t i = 0;
  for (int z = 0; z < dims_.z; ++z) {
    for (int y = 0; y < dims_.y; ++y) {
      for (int x = 0; x < dims_.x; ++x, ++i) {
        const double mua = grid.medium_at({x, y, z}).mua;
        if (mua > 0.0) {
          values_[i] = static_cast<double>(cells_[i]) * quantum_ /
                       (mua * v_voxel * static_cast<double>(photon_count_));
        } else {
          values_[i] = 0.0;
          ++zero_mua_voxels_;
        }
      }
    }
  }
  normalized_ = true;
}

std::vector<float> FluenceMap::to_float_volume() const {
  std::vector<float> out(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) out[i] = static_cast<float>(value(i));
  return out;
}

FluenceMap merge(std::span<const FluenceMap> maps) {
  if (maps.empty()) throw DimensionMismatch("merge: empty map list");
  FluenceMap out(maps[0].dims(), maps[0].photon_count(), AccumulationMode::PrivateMerge,
                 maps[0].deposit_count(0) >= 0);
  for (const FluenceMap& m : maps) out.add(m);
  return out;
}

}  // namespace voxmc
