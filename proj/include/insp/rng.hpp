#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "insp/geometry.hpp"

namespace insp {

/// splitmix64 step, used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mix a master seed with a stream label and index so that each consumer
/// (per-agent wind, IMU noise, ranging noise, ...) gets an independent,
/// reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = master ^ 0x9e3779b97f4a7c15ULL;
  for (char c : label) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    splitmix64(h);
  }
  h ^= index * 0xff51afd7ed558ccdULL;
  std::uint64_t state = h;
  return splitmix64(state);
}

/// Deterministic random stream. Gaussians come from Box-Muller on top of
/// mt19937_64 so results do not depend on the standard library's
/// normal_distribution implementation.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    // 53-bit mantissa double in [0, 1)
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
  }

  double gaussian(double mean, double std) { return mean + std * gaussian(); }

  Vec3 gaussian_vec3(double std) { return Vec3(gaussian() * std, gaussian() * std, gaussian() * std); }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace insp
