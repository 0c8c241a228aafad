#include "masim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "masim/hash.hpp"

namespace masim::experiments {

namespace {

const char* kCsvHeader =
    "sweep_param,sweep_value,scheme,trial,seed,scenario_hash,status,power_dbm,iters,wall_ms";

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

socp::Status status_from_string(const std::string& s) {
  for (int i = 0; i < 4; ++i) {
    const auto st = static_cast<socp::Status>(i);
    if (s == socp::to_string(st)) return st;
  }
  throw ConfigError("unknown status in CSV: " + s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Paths: return "L";
    case SweepParam::RegionSize: return "A_over_lambda";
    case SweepParam::Antennas: return "N";
    case SweepParam::Pairs: return "K";
  }
  return "?";
}

SweepParam sweep_param_from_string(const std::string& name) {
  if (name == "L") return SweepParam::Paths;
  if (name == "A_over_lambda") return SweepParam::RegionSize;
  if (name == "N") return SweepParam::Antennas;
  if (name == "K") return SweepParam::Pairs;
  throw ConfigError("unknown sweep parameter: " + name +
                    " (expected L, A_over_lambda, N or K)");
}

SweepSpec sweep_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("sweep spec must be a JSON object");
  static const std::vector<std::string> known = {"base",   "param",   "values",
                                                 "trials", "schemes", "out"};
  for (const auto& item : doc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown sweep spec key: " + item.key());
    }
  }
  SweepSpec spec;
  try {
    if (doc.contains("base")) spec.base = scenario_config_from_json(doc.at("base"));
    if (doc.contains("param")) spec.param = sweep_param_from_string(doc.at("param").get<std::string>());
    if (doc.contains("values")) spec.values = doc.at("values").get<std::vector<double>>();
    if (doc.contains("trials")) spec.trials = doc.at("trials").get<int>();
    if (doc.contains("out")) spec.out = doc.at("out").get<std::string>();
    if (doc.contains("schemes")) {
      spec.schemes.clear();
      for (const auto& name : doc.at("schemes")) {
        spec.schemes.push_back(driver::scheme_from_string(name.get<std::string>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
  if (spec.values.empty()) throw ConfigError("sweep spec needs a nonempty values list");
  if (spec.schemes.empty()) throw ConfigError("sweep spec needs a nonempty schemes list");
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  return spec;
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParam param,
                                 double value) {
  ScenarioConfig config = base;
  const auto as_count = [&](const char* what) {
    const int n = static_cast<int>(std::lround(value));
    if (std::abs(value - n) > 1e-9 || n < 1) {
      throw ConfigError(std::string(what) + " sweep values must be positive integers");
    }
    return n;
  };
  switch (param) {
    case SweepParam::Paths:
      config.paths = as_count("L");
      break;
    case SweepParam::RegionSize:
      if (value < 0.0) throw ConfigError("A_over_lambda sweep values must be >= 0");
      config.region = value;
      break;
    case SweepParam::Antennas:
      config.antennas = as_count("N");
      break;
    case SweepParam::Pairs: {
      config.pairs = as_count("K");
      // Per-user vectors follow the new K only when they are uniform.
      const auto rebroadcast = [&](std::vector<double>& v, const char* key) {
        if (v.empty()) return;
        if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end()) {
          throw ConfigError(std::string("cannot sweep K with non-uniform ") + key);
        }
        v.assign(static_cast<std::size_t>(config.pairs), v.front());
      };
      rebroadcast(config.sinr_min, "gamma_min");
      rebroadcast(config.noise, "sigma2");
      break;
    }
  }
  return config;
}

double to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }

std::vector<TrialResult> run_sweep(const SweepSpec& spec, int workers) {
  const int schemes = static_cast<int>(spec.schemes.size());
  const int tasks = static_cast<int>(spec.values.size()) * spec.trials;
  std::vector<TrialResult> rows(static_cast<std::size_t>(tasks) * schemes);

  auto run_task = [&](int task) {
    const int value_ix = task / spec.trials;
    const int trial = task % spec.trials;
    ScenarioConfig config = apply_sweep_value(spec.base, spec.param, spec.values[value_ix]);
    config.seed = spec.base.seed + static_cast<std::uint64_t>(trial);
    const Scenario scenario = build_scenario(config);
    const std::uint64_t scenario_hash = scenario.hash();

    for (int s = 0; s < schemes; ++s) {
      const auto t0 = std::chrono::steady_clock::now();
      driver::AlgorithmOptions options;
      options.scheme = spec.schemes[static_cast<std::size_t>(s)];
      const driver::RunResult run = driver::run(scenario, options);

      TrialResult& row = rows[static_cast<std::size_t>(task) * schemes + s];
      row.param = spec.param;
      row.value = spec.values[value_ix];
      row.scheme = options.scheme;
      row.trial = trial;
      row.seed = config.seed;
      row.scenario_hash = scenario_hash;
      row.status = run.status;
      if (run.status == socp::Status::Optimal) row.power_dbm = to_dbm(run.beam.total_power);
      row.iters = static_cast<int>(run.trace.size());
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    }
  };

  int pool = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, std::min(pool, tasks));
  if (pool == 1) {
    for (int t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) {
      threads.emplace_back([&] {
        for (int t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) run_task(t);
      });
    }
    for (auto& th : threads) th.join();
  }
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& rows) {
  std::vector<AggregateRow> cells;
  auto find_cell = [&](const TrialResult& r) -> AggregateRow& {
    for (auto& c : cells) {
      if (c.value == r.value && c.scheme == r.scheme && c.param == r.param) return c;
    }
    cells.push_back({r.param, r.value, r.scheme, 0, 0, 0.0,
                     std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN()});
    return cells.back();
  };
  // First pass: counts and means over Optimal rows.
  for (const auto& r : rows) {
    AggregateRow& c = find_cell(r);
    ++c.trials;
    if (r.status == socp::Status::Optimal) {
      ++c.optimal;
      c.mean_power_dbm = std::isnan(c.mean_power_dbm) ? r.power_dbm
                                                      : c.mean_power_dbm + r.power_dbm;
    }
  }
  for (auto& c : cells) {
    c.feasibility_rate = c.trials > 0 ? static_cast<double>(c.optimal) / c.trials : 0.0;
    if (c.optimal > 0) c.mean_power_dbm /= c.optimal;
  }
  // Second pass: sample variance for the confidence half-width.
  std::vector<double> sq(cells.size(), 0.0);
  for (const auto& r : rows) {
    if (r.status != socp::Status::Optimal) continue;
    const AggregateRow& c = find_cell(r);
    const std::size_t ix = static_cast<std::size_t>(&c - cells.data());
    const double d = r.power_dbm - c.mean_power_dbm;
    sq[ix] += d * d;
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    if (c.optimal >= 1) {
      const double var = c.optimal > 1 ? sq[i] / (c.optimal - 1) : 0.0;
      c.ci95_dbm = 1.96 * std::sqrt(var / c.optimal);
    }
  }
  return cells;
}

void write_trials_csv(const std::string& path, const std::vector<TrialResult>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << to_string(r.param) << ',' << format_double(r.value) << ','
        << driver::to_string(r.scheme) << ',' << r.trial << ',' << r.seed << ','
        << to_hex(r.scenario_hash) << ',' << socp::to_string(r.status) << ','
        << format_double(r.power_dbm) << ',' << r.iters << ','
        << format_double(r.wall_ms) << "\n";
  }
}

std::vector<TrialResult> read_trials_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open CSV: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("bad CSV header in " + path);
  }
  std::vector<TrialResult> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw ConfigError("bad CSV row in " + path + ": " + line);
    TrialResult r;
    r.param = sweep_param_from_string(f[0]);
    r.value = std::stod(f[1]);
    r.scheme = driver::scheme_from_string(f[2]);
    r.trial = std::stoi(f[3]);
    r.seed = std::stoull(f[4]);
    r.scenario_hash = std::stoull(f[5], nullptr, 16);
    r.status = status_from_string(f[6]);
    r.power_dbm = f[7] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[7]);
    r.iters = std::stoi(f[8]);
    r.wall_ms = f[9] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[9]);
    rows.push_back(r);
  }
  return rows;
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "sweep_param,sweep_value,scheme,trials,optimal,feasibility_rate,"
         "mean_power_dbm,ci95_dbm\n";
  for (const auto& r : rows) {
    out << to_string(r.param) << ',' << format_double(r.value) << ','
        << driver::to_string(r.scheme) << ',' << r.trials << ',' << r.optimal << ','
        << format_double(r.feasibility_rate) << ',' << format_double(r.mean_power_dbm)
        << ',' << format_double(r.ci95_dbm) << "\n";
  }
}

}  // namespace masim::experiments
