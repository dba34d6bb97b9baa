#include "voxmc/rng.hpp"

namespace voxmc {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) : stream_id_(stream_id) {
  const std::uint64_t z = master_seed ^ stream_id;
  s_[0] = mix64(z);
  s_[1] = mix64(z + 0x9E3779B97F4A7C15ULL);
  if (s_[0] == 0 && s_[1] == 0) {
    s_[1] = 0x6A09E667F3BCC909ULL;  // all-zero state is forbidden for xorshift
  }
}

}  // namespace voxmc
