#include "masim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>

#include "masim/hash.hpp"

namespace masim {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

std::vector<double> per_user(const nlohmann::json& v, int users, const char* key) {
  std::vector<double> out;
  if (v.is_number()) {
    out.assign(static_cast<std::size_t>(users), v.get<double>());
  } else if (v.is_array()) {
    out = v.get<std::vector<double>>();
    require(static_cast<int>(out.size()) == users,
            std::string(key) + " array length must equal k");
  } else {
    throw ConfigError(std::string(key) + " must be a number or array");
  }
  for (double x : out) require(x > 0.0, std::string(key) + " entries must be positive");
  return out;
}

}  // namespace

void ScenarioConfig::validate_and_fill() {
  require(pairs >= 1, "k must be >= 1");
  require(antennas >= 1, "n must be >= 1");
  require(paths >= 1, "l must be >= 1");
  require(pool_size >= 1, "s must be >= 1");
  require(region >= 0.0, "a must be >= 0");
  require(wavelength > 0.0, "wavelength must be positive");
  require(min_spacing() > 0.0, "d must be positive");
  require(direct_distance > 0.0 && cross_distance > 0.0, "link distances must be positive");
  require(ref_gain > 0.0, "beta0 must be positive");
  require(pathloss_exp >= 0.0, "alpha0 must be >= 0");
  if (sinr_min.empty()) sinr_min.assign(static_cast<std::size_t>(pairs), 10.0);
  if (noise.empty()) noise.assign(static_cast<std::size_t>(pairs), 1e-11);
  require(static_cast<int>(sinr_min.size()) == pairs, "gamma_min length must equal k");
  require(static_cast<int>(noise.size()) == pairs, "sigma2 length must equal k");
  for (double g : sinr_min) require(g > 0.0, "gamma_min entries must be positive");
  for (double s : noise) require(s > 0.0, "sigma2 entries must be positive");
}

ScenarioConfig scenario_config_from_json(const nlohmann::json& doc) {
  require(doc.is_object(), "scenario config must be a JSON object");
  static const std::vector<std::string> known = {
      "k", "n", "l", "a", "d", "s", "gamma_min", "sigma2",
      "d_kk", "d_kj", "beta0", "alpha0", "seed"};
  for (const auto& item : doc.items()) {
    require(std::find(known.begin(), known.end(), item.key()) != known.end(),
            "unknown scenario config key: " + item.key());
  }
  ScenarioConfig c;
  try {
    if (doc.contains("k")) c.pairs = doc.at("k").get<int>();
    if (doc.contains("n")) c.antennas = doc.at("n").get<int>();
    if (doc.contains("l")) c.paths = doc.at("l").get<int>();
    if (doc.contains("a")) c.region = doc.at("a").get<double>();
    if (doc.contains("d")) c.spacing = doc.at("d").get<double>();
    if (doc.contains("s")) c.pool_size = doc.at("s").get<int>();
    if (doc.contains("d_kk")) c.direct_distance = doc.at("d_kk").get<double>();
    if (doc.contains("d_kj")) c.cross_distance = doc.at("d_kj").get<double>();
    if (doc.contains("beta0")) c.ref_gain = doc.at("beta0").get<double>();
    if (doc.contains("alpha0")) c.pathloss_exp = doc.at("alpha0").get<double>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("gamma_min")) c.sinr_min = per_user(doc.at("gamma_min"), c.pairs, "gamma_min");
    if (doc.contains("sigma2")) c.noise = per_user(doc.at("sigma2"), c.pairs, "sigma2");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  if (doc.contains("d")) require(c.spacing > 0.0, "d must be positive");
  c.validate_and_fill();
  return c;
}

nlohmann::json scenario_config_to_json(const ScenarioConfig& config) {
  nlohmann::json doc;
  doc["k"] = config.pairs;
  doc["n"] = config.antennas;
  doc["l"] = config.paths;
  doc["a"] = config.region;
  doc["d"] = config.min_spacing();
  doc["s"] = config.pool_size;
  doc["gamma_min"] = config.sinr_min;
  doc["sigma2"] = config.noise;
  doc["d_kk"] = config.direct_distance;
  doc["d_kj"] = config.cross_distance;
  doc["beta0"] = config.ref_gain;
  doc["alpha0"] = config.pathloss_exp;
  doc["seed"] = config.seed;
  return doc;
}

PathAngles sample_angle_pair(double u1, double u2) {
  if (!(u1 >= 0.0 && u1 <= 1.0 && u2 >= 0.0 && u2 <= 1.0)) {
    throw std::invalid_argument("uniform inputs must lie in [0, 1]");
  }
  PathAngles a;
  a.elevation = std::acos(1.0 - 2.0 * u1);
  a.azimuth = std::numbers::pi * u2;
  return a;
}

double expected_gain(double distance, double ref_gain, double pathloss_exp) {
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
  return ref_gain * std::pow(distance, -pathloss_exp);
}

CVec sample_path_responses(int paths, double gain, Rng& rng) {
  const double sigma = std::sqrt(gain / (2.0 * paths));  // per real component
  CVec tau(paths);
  for (int l = 0; l < paths; ++l) {
    auto [re, im] = rng.normal_pair();
    tau(l) = Complex(sigma * re, sigma * im);
  }
  return tau;
}

Scenario build_scenario(const ScenarioConfig& input) {
  ScenarioConfig config = input;
  config.validate_and_fill();

  const int users = config.pairs;
  const int pool = config.pool_size;
  const int paths = config.paths;
  Rng rng(config.seed);

  std::vector<std::vector<PathAngles>> pools(static_cast<std::size_t>(users));
  for (int j = 0; j < users; ++j) {
    pools[j].reserve(static_cast<std::size_t>(pool));
    for (int s = 0; s < pool; ++s) {
      const double u1 = rng.uniform();
      const double u2 = rng.uniform();
      pools[j].push_back(sample_angle_pair(u1, u2));
    }
  }

  Scenario scenario;
  scenario.config = config;
  scenario.paths.assign(static_cast<std::size_t>(users),
                        std::vector<PathSet>(static_cast<std::size_t>(users)));

  for (int j = 0; j < users; ++j) {
    for (int k = 0; k < users; ++k) {
      std::vector<int> selected(static_cast<std::size_t>(paths));
      if (paths <= pool) {
        // Partial Fisher-Yates over the pool indices; consumes `paths` uniforms.
        std::vector<int> idx(static_cast<std::size_t>(pool));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < paths; ++i) {
          const int rest = pool - i;
          const int pick = i + std::min(rest - 1, static_cast<int>(rng.uniform() * rest));
          std::swap(idx[i], idx[pick]);
          selected[i] = idx[i];
        }
      } else {
        for (int i = 0; i < paths; ++i) {
          selected[i] = std::min(pool - 1, static_cast<int>(rng.uniform() * pool));
        }
      }
      std::vector<PathAngles> angles(static_cast<std::size_t>(paths));
      for (int i = 0; i < paths; ++i) angles[i] = pools[j][selected[i]];

      const double dist = (k == j) ? config.direct_distance : config.cross_distance;
      const double gain = expected_gain(dist, config.ref_gain, config.pathloss_exp);
      CVec tau = sample_path_responses(paths, gain, rng);
      scenario.paths[k][j] = PathSet(std::move(angles), std::move(tau));
    }
  }
  return scenario;
}

std::uint64_t Scenario::hash() const {
  Fnv1a h;
  h.add(config.pairs);
  h.add(config.antennas);
  h.add(config.paths);
  h.add(config.region);
  h.add(config.min_spacing());
  h.add(config.pool_size);
  for (double g : config.sinr_min) h.add(g);
  for (double s : config.noise) h.add(s);
  h.add(config.wavelength);
  h.add(config.seed);
  for (const auto& row : paths) {
    for (const auto& link : row) {
      for (const auto& a : link.angles()) {
        h.add(a.elevation);
        h.add(a.azimuth);
      }
      for (int l = 0; l < link.count(); ++l) {
        h.add(link.responses()(l).real());
        h.add(link.responses()(l).imag());
      }
    }
  }
  return h.value();
}

Eigen::Matrix2Xd fpa_layout(int antennas, double wavelength, double region_side) {
  if (antennas < 1) throw std::invalid_argument("antenna count must be >= 1");
  const int rows = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(antennas))));
  const int cols = (antennas + rows - 1) / rows;
  const double step = 0.5 * wavelength;
  if (static_cast<double>(rows - 1) * step > region_side + 1e-12 ||
      static_cast<double>(cols - 1) * step > region_side + 1e-12) {
    throw std::invalid_argument("half-wavelength grid does not fit the region");
  }
  const double x0 = 0.5 * (region_side - static_cast<double>(cols - 1) * step);
  const double y0 = 0.5 * (region_side - static_cast<double>(rows - 1) * step);
  Eigen::Matrix2Xd grid(2, antennas);
  for (int i = 0; i < antennas; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    grid.col(i) = Vec2(x0 + c * step, y0 + r * step);
  }
  return grid;
}

}  // namespace masim
