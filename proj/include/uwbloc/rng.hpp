#ifndef UWBLOC_RNG_HPP_
#define UWBLOC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace uwbloc {

// Seedable generator with a fixed, documented algorithm so streams reproduce
// across platforms: std::mt19937_64 (standard-specified sequence) driving
// explicit uniform/Box-Muller transforms. Substreams derive their seed with
// SplitMix64 so independent consumers (range noise, IMU noise) stay decoupled
// from each other's draw counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  /// Independent generator derived from (seed, tag).
  static Rng substream(std::uint64_t seed, std::uint64_t tag) {
    return Rng(splitmix64(seed ^ splitmix64(tag)));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; pairs are cached, so draw counts are
  /// deterministic: one or zero u64 pairs consumed per call.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace uwbloc

#endif  // UWBLOC_RNG_HPP_
