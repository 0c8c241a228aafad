#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>

#include "masim/scenario.hpp"

using namespace masim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("angle sampling endpoints and marginals") {
  CHECK(sample_angle_pair(0.0, 0.3).elevation == doctest::Approx(0.0));
  CHECK(sample_angle_pair(0.5, 0.3).elevation == doctest::Approx(kPi / 2.0));
  CHECK(sample_angle_pair(1.0, 0.0).elevation == doctest::Approx(kPi));
  CHECK(sample_angle_pair(0.2, 1.0).azimuth == doctest::Approx(kPi));
  CHECK_THROWS_AS(sample_angle_pair(-0.1, 0.5), std::invalid_argument);

  // Monte Carlo check of the elevation density sin/2: E[cos] = 0.
  Rng rng(123);
  double cos_sum = 0.0;
  double az_sum = 0.0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    const PathAngles a = sample_angle_pair(rng.uniform(), rng.uniform());
    cos_sum += std::cos(a.elevation);
    az_sum += a.azimuth;
  }
  CHECK(std::abs(cos_sum / samples) < 0.01);
  CHECK(az_sum / samples == doctest::Approx(kPi / 2.0).epsilon(0.01));
}

TEST_CASE("expected gain") {
  CHECK(expected_gain(1.0, 1e-4, 2.8) == doctest::Approx(1e-4));
  CHECK(expected_gain(123.0, 0.5, 0.0) == doctest::Approx(0.5));
  // Independent evaluation through exp/log.
  const double direct = expected_gain(50.0, 1e-4, 2.8);
  CHECK(direct == doctest::Approx(1e-4 * std::exp(-2.8 * std::log(50.0))).epsilon(1e-12));
  CHECK_THROWS_AS(expected_gain(0.0, 1e-4, 2.8), std::invalid_argument);
}

TEST_CASE("path responses: scale, determinism, normalization") {
  Rng zero_rng(5);
  const CVec zeros = sample_path_responses(4, 0.0, zero_rng);
  CHECK(zeros.norm() == 0.0);

  Rng a(42), b(42);
  const CVec first = sample_path_responses(6, 2.5e-9, a);
  const CVec second = sample_path_responses(6, 2.5e-9, b);
  CHECK((first - second).norm() == 0.0);

  // E[sum |tau|^2] = gain, within Monte Carlo tolerance.
  Rng rng(77);
  const double gain = 3.0e-9;
  const int draws = 100000;
  const int paths = 10;
  double total = 0.0;
  for (int i = 0; i < draws; ++i) {
    total += sample_path_responses(paths, gain, rng).squaredNorm();
  }
  CHECK(total / draws == doctest::Approx(gain).epsilon(0.02));
}

TEST_CASE("build_scenario structure and determinism") {
  ScenarioConfig config;
  config.pairs = 2;
  config.antennas = 2;
  config.paths = 4;
  config.seed = 9001;

  const Scenario s1 = build_scenario(config);
  const Scenario s2 = build_scenario(config);
  CHECK(s1.hash() == s2.hash());
  REQUIRE(s1.paths.size() == 2);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(s1.paths[k].size() == 2);
    for (int j = 0; j < 2; ++j) {
      CHECK(s1.paths[k][j].count() == 4);
      CHECK((s1.paths[k][j].responses() - s2.paths[k][j].responses()).norm() == 0.0);
    }
  }

  ScenarioConfig other = config;
  other.seed = 9002;
  CHECK(build_scenario(other).hash() != s1.hash());
}

TEST_CASE("links of one transmitter draw from a pool of size s") {
  ScenarioConfig config;
  config.pairs = 3;
  config.paths = 8;
  config.pool_size = 5;  // with replacement, since l > s
  config.seed = 31;
  const Scenario scenario = build_scenario(config);

  for (int j = 0; j < config.pairs; ++j) {
    std::set<std::pair<double, double>> distinct;
    for (int k = 0; k < config.pairs; ++k) {
      for (const auto& a : scenario.paths[k][j].angles()) {
        distinct.insert({a.elevation, a.azimuth});
      }
    }
    CHECK(static_cast<int>(distinct.size()) <= config.pool_size);
  }
}

TEST_CASE("pool selection without replacement exhausts the pool when l == s") {
  ScenarioConfig config;
  config.pairs = 2;
  config.paths = 6;
  config.pool_size = 6;
  config.seed = 8;
  const Scenario scenario = build_scenario(config);

  // Every link from transmitter j must carry the same angle multiset (a
  // permutation of the full pool).
  for (int j = 0; j < 2; ++j) {
    std::multiset<double> reference;
    for (const auto& a : scenario.paths[0][j].angles()) reference.insert(a.elevation);
    CHECK(reference.size() == 6);
    std::multiset<double> other;
    for (const auto& a : scenario.paths[1][j].angles()) other.insert(a.elevation);
    CHECK(reference == other);
  }
}

TEST_CASE("expected path power tracks the link distances") {
  ScenarioConfig config;
  config.pairs = 2;
  config.paths = 6;
  double direct = 0.0, cross = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    config.seed = 1000 + static_cast<std::uint64_t>(r);
    const Scenario s = build_scenario(config);
    direct += s.paths[0][0].responses().squaredNorm();
    cross += s.paths[0][1].responses().squaredNorm();
  }
  const double want_direct = expected_gain(50.0, 1e-4, 2.8);
  const double want_cross = expected_gain(80.0, 1e-4, 2.8);
  CHECK(direct / reps == doctest::Approx(want_direct).epsilon(0.15));
  CHECK(cross / reps == doctest::Approx(want_cross).epsilon(0.15));
}

TEST_CASE("fpa layout grids") {
  const double lambda = 0.1;

  const Eigen::Matrix2Xd one = fpa_layout(1, lambda, 0.4);
  CHECK(one.col(0).x() == doctest::Approx(0.2));
  CHECK(one.col(0).y() == doctest::Approx(0.2));

  const Eigen::Matrix2Xd four = fpa_layout(4, lambda, 0.4);
  REQUIRE(four.cols() == 4);
  CHECK((four.col(1) - four.col(0)).norm() == doctest::Approx(lambda / 2.0));
  CHECK((four.col(2) - four.col(0)).norm() == doctest::Approx(lambda / 2.0));
  CHECK((four.col(3) - four.col(0)).norm() == doctest::Approx(lambda / std::numbers::sqrt2));

  const Eigen::Matrix2Xd nine = fpa_layout(9, lambda, 0.4);
  double min_dist = 1e9;
  for (int a = 0; a < 9; ++a) {
    for (int b = a + 1; b < 9; ++b) {
      min_dist = std::min(min_dist, (nine.col(a) - nine.col(b)).norm());
    }
  }
  CHECK(min_dist == doctest::Approx(lambda / 2.0));
  for (int a = 0; a < 9; ++a) {
    CHECK(nine.col(a).minCoeff() >= -1e-15);
    CHECK(nine.col(a).maxCoeff() <= 0.4 + 1e-15);
  }

  CHECK_THROWS_AS(fpa_layout(9, lambda, 0.09), std::invalid_argument);
}

TEST_CASE("scenario config json round trip and validation") {
  const auto doc = nlohmann::json::parse(R"({
    "k": 3, "n": 4, "l": 6, "a": 2.5, "s": 10,
    "gamma_min": 10.0, "sigma2": [1e-11, 2e-11, 3e-11],
    "d_kk": 50.0, "d_kj": 80.0, "beta0": 1e-4, "alpha0": 2.8, "seed": 7
  })");
  const ScenarioConfig config = scenario_config_from_json(doc);
  CHECK(config.pairs == 3);
  CHECK(config.sinr_min == std::vector<double>{10.0, 10.0, 10.0});
  CHECK(config.noise[2] == doctest::Approx(3e-11));
  CHECK(config.min_spacing() == doctest::Approx(0.05));  // default: half wavelength

  const ScenarioConfig round =
      scenario_config_from_json(scenario_config_to_json(config));
  CHECK(round.pairs == config.pairs);
  CHECK(round.noise == config.noise);
  CHECK(round.seed == config.seed);

  SUBCASE("unknown keys are rejected") {
    auto bad = doc;
    bad["paths"] = 4;
    CHECK_THROWS_AS(scenario_config_from_json(bad), ConfigError);
  }
  SUBCASE("wrong-length arrays are rejected") {
    auto bad = doc;
    bad["sigma2"] = {1e-11, 2e-11};
    CHECK_THROWS_AS(scenario_config_from_json(bad), ConfigError);
  }
  SUBCASE("non-positive values are rejected") {
    auto bad = doc;
    bad["k"] = 0;
    CHECK_THROWS_AS(scenario_config_from_json(bad), ConfigError);
    auto bad2 = doc;
    bad2["beta0"] = -1.0;
    CHECK_THROWS_AS(scenario_config_from_json(bad2), ConfigError);
  }
  SUBCASE("defaults fill an empty document") {
    const ScenarioConfig def = scenario_config_from_json(nlohmann::json::object());
    CHECK(def.pairs == 2);
    CHECK(def.antennas == 4);
    CHECK(def.paths == 10);
    CHECK(def.region == doctest::Approx(4.0));
    CHECK(def.sinr_min == std::vector<double>{10.0, 10.0});
    CHECK(def.noise == std::vector<double>{1e-11, 1e-11});
  }
}
