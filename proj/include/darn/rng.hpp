#pragma once

#include <cstdint>
#include <random>

namespace darn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic random stream: std::mt19937_64 (a fully specified engine)
// with hand-rolled 53-bit uniform doubles. std::*_distribution objects are
// implementation-defined, so they are not used anywhere; sample streams are
// identical across platforms and standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Decorrelated stream for (seed, stream id); used to give every datum /
  // epoch / repeat its own reproducible stream regardless of thread count.
  static RandomStream substream(std::uint64_t seed, std::uint64_t stream) {
    return RandomStream(splitmix64(seed ^ splitmix64(stream)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace darn
