#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "masim/channel.hpp"
#include "masim/rng.hpp"

namespace masim {

/// Raised for malformed configuration documents (unknown keys, bad values).
/// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem-instance parameters. JSON keys (all optional, snake_case):
///   k, n, l, a, d, s, gamma_min, sigma2, d_kk, d_kj, beta0, alpha0, seed
/// where `a` is the region side in wavelengths and `d` the minimum antenna
/// spacing in metres (default: half a wavelength). gamma_min/sigma2 accept a
/// scalar (broadcast to all users) or an array of length k. Unknown keys are
/// rejected.
struct ScenarioConfig {
  int pairs = 2;        // k: transmitter-user pairs
  int antennas = 4;     // n: movable antennas per transmitter
  int paths = 10;       // l: propagation paths per link
  double region = 4.0;  // a: region side, in wavelengths
  double spacing = 0.0; // d: min inter-antenna distance, metres; 0 -> wavelength/2
  int pool_size = 10;   // s: per-transmitter angle pool size

  std::vector<double> sinr_min{};  // gamma_min, linear, per user (empty -> 10)
  std::vector<double> noise{};     // sigma2, watts, per user (empty -> 1e-11)

  double direct_distance = 50.0;  // d_kk, metres
  double cross_distance = 80.0;   // d_kj, metres
  double ref_gain = 1e-4;         // beta0, linear gain at 1 m
  double pathloss_exp = 2.8;      // alpha0
  std::uint64_t seed = 1;

  // Carrier wavelength in metres. Fixed by convention rather than exposed in
  // the JSON schema: results depend on geometry only through positions
  // measured in wavelengths.
  double wavelength = 0.1;

  /// Resolved minimum spacing (metres).
  double min_spacing() const { return spacing > 0.0 ? spacing : 0.5 * wavelength; }
  /// Region side in metres.
  double region_side() const { return region * wavelength; }

  /// Validates ranges and broadcasts per-user vectors; throws ConfigError.
  void validate_and_fill();
};

ScenarioConfig scenario_config_from_json(const nlohmann::json& doc);
nlohmann::json scenario_config_to_json(const ScenarioConfig& config);

/// A fully materialized random instance: one PathSet per (user, transmitter)
/// link, drawn from the per-transmitter angle pools.
struct Scenario {
  ScenarioConfig config;
  std::vector<std::vector<PathSet>> paths;  // [user][transmitter]

  std::uint64_t hash() const;
};

/// Inverse-CDF sample of the hemisphere path-direction density
/// f(el, az) = sin(el)/(2*pi) restricted to az in [0, pi]:
/// elevation = arccos(1 - 2*u1), azimuth = pi*u2.
PathAngles sample_angle_pair(double u1, double u2);

/// Expected channel power gain at distance d: ref_gain * d^(-pathloss_exp).
double expected_gain(double distance, double ref_gain, double pathloss_exp);

/// i.i.d. circularly-symmetric complex Gaussian path responses with
/// per-path variance gain/paths (so the expected total path power is gain).
CVec sample_path_responses(int paths, double gain, Rng& rng);

/// Builds the instance deterministically from config.seed. Stream order:
/// first each transmitter's pool of `s` angle pairs (j ascending, two
/// uniforms per pair), then per transmitter j and user k the pool selection
/// (partial Fisher-Yates when l <= s, else l independent draws) followed by
/// the l path responses (one Box-Muller pair each).
Scenario build_scenario(const ScenarioConfig& config);

/// Deterministic fixed-antenna grid for one transmitter: ceil(sqrt(n)) rows
/// at half-wavelength spacing, centred in the [0, side]^2 region, row-major
/// fill of n points.
Eigen::Matrix2Xd fpa_layout(int antennas, double wavelength, double region_side);

}  // namespace masim
