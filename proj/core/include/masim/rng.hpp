#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace masim {

/// Deterministic random source shared by all sampling code.
///
/// The engine is std::mt19937_64, whose output stream is pinned bit-exactly
/// by the C++ standard. The variate mappings live here (instead of
/// std::*_distribution) because the standard leaves those internals
/// unspecified, and scenario reproducibility requires an identical stream on
/// every platform. Consumption order: uniform() advances the engine once,
/// normal_pair() twice (Box-Muller).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Two independent standard normal variates (Box-Muller transform).
  std::pair<double, double> normal_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace masim
