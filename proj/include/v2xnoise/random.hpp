#ifndef V2XNOISE_RANDOM_HPP
#define V2XNOISE_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "v2xnoise/geometry.hpp"

namespace v2xnoise {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a over raw bytes, used only for key derivation.
inline std::uint64_t fnv1a(std::uint64_t h, const void* data,
                           std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based deterministic stream keyed by a root seed plus a derivation
/// path such as (scenario, frame, sensor, noise kind). The same key always
/// replays the same sample sequence, on any platform; distinct paths give
/// statistically independent sub-streams. No libc or std::random machinery
/// is involved, so outputs are bit-stable across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t root_seed)
      : key_(mix_seed(root_seed)), state_(key_) {}

  /// Child stream for one more path component. The parent is unaffected.
  RandomStream derive(std::string_view component) const {
    RandomStream child(*this);
    child.key_ = detail::fnv1a(child.key_ ^ 0xA5A5A5A5A5A5A5A5ULL,
                               component.data(), component.size());
    child.state_ = child.key_;
    return child;
  }

  RandomStream derive(std::uint64_t component) const {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<unsigned char>(component >> (8 * i));
    }
    RandomStream child(*this);
    child.key_ = detail::fnv1a(child.key_ ^ 0x5A5A5A5A5A5A5A5AULL, bytes, 8);
    child.state_ = child.key_;
    return child;
  }

  std::uint64_t next_u64() { return detail::splitmix64_next(state_); }

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi). Degenerate range returns lo exactly.
  double uniform(double lo, double hi) {
    if (lo == hi) {
      next_u64();  // keep the draw count independent of the range
      return lo;
    }
    return lo + (hi - lo) * uniform01();
  }

  /// Box-Muller; consumes exactly two draws per sample. sigma == 0 returns
  /// the mean exactly (draws still consumed).
  double gaussian(double mean, double sigma) {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    double u2 = uniform01();
    if (sigma == 0.0) return mean;
    double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * mag * std::cos(2.0 * kPi * u2);
  }

 private:
  static std::uint64_t mix_seed(std::uint64_t seed) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
    }
    return detail::fnv1a(0xCBF29CE484222325ULL, bytes, 8);
  }

  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace v2xnoise

#endif  // V2XNOISE_RANDOM_HPP
