#pragma once

#include <cstdint>
#include <random>

namespace anderson {

// One independent pseudo-random stream. Streams are cheap to construct and are
// never shared between concurrent tasks; parallel code derives one stream per
// task index with RandomStream::derive.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Splittable-stream rule: stream (seed, index) is an mt19937_64 seeded from
  // a seed_seq over the 32-bit halves of seed and index, plus a salt word that
  // separates independent families drawn from the same master seed.
  static RandomStream derive(std::uint64_t seed, std::uint64_t index,
                             std::uint32_t salt = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  RandomStream(std::seed_seq& seq) : engine_(seq) {}

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace anderson
