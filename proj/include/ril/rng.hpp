#pragma once

#include <cstdint>
#include <random>

namespace ril {

// Independent generator for (seed, stream). Streams are used per search run
// and per Monte-Carlo chunk so results do not depend on the thread count.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x52694cu};
  return std::mt19937_64(seq);
}

}  // namespace ril
