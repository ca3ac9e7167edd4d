#include "anderson/rng.hpp"

namespace anderson {

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t index,
                                  std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), salt};
  return RandomStream(seq);
}

}  // namespace anderson
