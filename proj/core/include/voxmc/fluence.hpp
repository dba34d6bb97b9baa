#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "voxmc/errors.hpp"
#include "voxmc/types.hpp"

namespace voxmc {

/// 3-D accumulation buffer of deposited photon weight.
///
/// Cells hold fixed-point integers (weight / quantum). Integer addition is
/// associative, so the accumulated totals are exactly the same no matter how
/// deposits are ordered or grouped across threads, devices, or partitioning
/// strategies; merge-mode volumes are byte-identical across all of them. The
/// quantum is a power of two chosen from photon_count so the worst-case
/// per-voxel total cannot overflow 63 bits.
///
/// SharedAtomic maps take concurrent deposits through a compare-and-swap
/// loop per cell; PrivateMerge maps are single-owner and use plain adds.
class FluenceMap {
 public:
  FluenceMap(VoxelIndex dims, std::uint64_t photon_count,
             AccumulationMode mode = AccumulationMode::PrivateMerge,
             bool track_counts = false);

  VoxelIndex dims() const { return dims_; }
  std::size_t voxel_count() const { return cells_.size(); }
  std::uint64_t photon_count() const { return photon_count_; }
  AccumulationMode mode() const { return mode_; }
  double quantum() const { return quantum_; }
  bool normalized() const { return normalized_; }

  void deposit(std::size_t cell, double dw) {
    const std::int64_t q = static_cast<std::int64_t>(std::llround(dw * inv_quantum_));
    if (mode_ == AccumulationMode::SharedAtomic) {
      std::atomic_ref<std::int64_t> ref(cells_[cell]);
      std::int64_t old = ref.load(std::memory_order_relaxed);
      while (!ref.compare_exchange_weak(old, old + q, std::memory_order_relaxed)) {
      }
      if (!counts_.empty()) {
        std::atomic_ref<std::int64_t> cref(counts_[cell]);
        cref.fetch_add(1, std::memory_order_relaxed);
      }
    } else {
      cells_[cell] += q;
      if (!counts_.empty()) ++counts_[cell];
    }
  }

  /// Range-checked deposit; throws VoxelOutOfRange.
  void deposit(const VoxelIndex& v, double dw);

  /// Raw deposited weight of one voxel (or normalized fluence after
  /// normalize()).
  double value(std::size_t cell) const {
    return normalized_ ? values_[cell] : static_cast<double>(cells_[cell]) * quantum_;
  }
  std::int64_t raw_cell(std::size_t cell) const { return cells_[cell]; }
  std::int64_t deposit_count(std::size_t cell) const { return counts_.empty() ? -1 : counts_[cell]; }

  double total_deposited() const;

  /// Adds another map's cells into this one (same dims, quantum, both raw).
  void add(const FluenceMap& other);

  /// Converts raw deposits E into fluence Phi = E / (mua * V * N), in
  /// 1/mm^2 per launched photon. Voxels with mua = 0 map to 0.
  void normalize(const VoxelGrid& grid);
  std::size_t zero_mua_voxels() const { return zero_mua_voxels_; }

  /// x-fastest float32 volume of value().
  std::vector<float> to_float_volume() const;

 private:
  VoxelIndex dims_;
  std::uint64_t photon_count_;
  AccumulationMode mode_;
  double quantum_;
  double inv_quantum_;
  bool normalized_ = false;
  std::size_t zero_mua_voxels_ = 0;
  std::vector<std::int64_t> cells_;
  std::vector<std::int64_t> counts_;
  std::vector<double> values_;
};

/// Voxelwise sum in list order; all maps must share dims and quantum.
FluenceMap merge(std::span<const FluenceMap> maps);

}  // namespace voxmc
