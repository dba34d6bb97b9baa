#pragma once

#include <cstdint>

namespace voxmc {

/// xorshift128+ stream seeded from (master_seed, stream_id) through a
/// splitmix64 finalizer. One stream per photon keeps every trajectory a pure
/// function of the global photon index, independent of worker count or
/// claim order.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64() {
    std::uint64_t s1 = s_[0];
    const std::uint64_t s0 = s_[1];
    const std::uint64_t result = s0 + s1;
    s_[0] = s0;
    s1 ^= s1 << 23;
    s_[1] = s1 ^ s0 ^ (s1 >> 18) ^ (s0 >> 5);
    return result;
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t state_lo() const { return s_[0]; }
  std::uint64_t state_hi() const { return s_[1]; }

 private:
  std::uint64_t s_[2];
  std::uint64_t stream_id_;
};

/// splitmix64 avalanche finalizer.
std::uint64_t mix64(std::uint64_t z);

}  // namespace voxmc
