// masim: movable-antenna interference-network simulator.
//
//   masim run    --config <file> --scheme <name> [--seed <u64>] [--out <path>]
//   masim sweep  --spec <file> [--trials <n>] [--workers <n>] [--out <path>]
//   masim report --in <csv> --out <csv>
//
// Exit codes: 0 success, 2 configuration error, 3 all trials failed.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>

#include "masim/experiments.hpp"
#include "masim/hash.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw masim::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw masim::ConfigError(path + ": " + e.what());
  }
}

int cmd_run(const std::string& config_path, const std::string& scheme_name,
            std::optional<std::uint64_t> seed, const std::string& out_path) {
  masim::ScenarioConfig config = masim::scenario_config_from_json(load_json(config_path));
  if (seed) config.seed = *seed;

  masim::driver::AlgorithmOptions options;
  options.scheme = masim::driver::scheme_from_string(scheme_name);

  const masim::Scenario scenario = masim::build_scenario(config);
  const masim::driver::RunResult result = masim::driver::run(scenario, options);

  nlohmann::json doc;
  doc["scheme"] = scheme_name;
  doc["seed"] = config.seed;
  doc["scenario_hash"] = masim::to_hex(scenario.hash());
  doc["status"] = masim::socp::to_string(result.status);
  if (result.status == masim::socp::Status::Optimal) {
    doc["total_power_w"] = result.beam.total_power;
    doc["power_dbm"] = masim::experiments::to_dbm(result.beam.total_power);
    doc["sinr"] = std::vector<double>(result.beam.sinr.data(),
                                      result.beam.sinr.data() + result.beam.sinr.size());
    auto positions = nlohmann::json::array();
    for (const auto& tx : result.positions.tx) {
      auto one = nlohmann::json::array();
      for (Eigen::Index n = 0; n < tx.cols(); ++n) one.push_back({tx(0, n), tx(1, n)});
      positions.push_back(one);
    }
    doc["positions_m"] = positions;
  }
  auto trace = nlohmann::json::array();
  for (const auto& it : result.trace) {
    trace.push_back({{"power_w", it.power},
                     {"min_sinr_margin", it.min_margin},
                     {"position_hash", masim::to_hex(it.position_hash)},
                     {"wall_ms", it.wall_ms}});
  }
  doc["trace"] = trace;

  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << text;
  }
  return result.status == masim::socp::Status::Optimal ? 0 : kExitAllFailed;
}

int cmd_sweep(const std::string& spec_path, std::optional<int> trials,
              int workers, const std::string& out_override) {
  masim::experiments::SweepSpec spec =
      masim::experiments::sweep_spec_from_json(load_json(spec_path));
  if (trials) {
    if (*trials < 1) throw masim::ConfigError("trials must be >= 1");
    spec.trials = *trials;
  }
  if (!out_override.empty()) spec.out = out_override;
  if (spec.out.empty()) throw masim::ConfigError("no output path (spec `out` or --out)");

  const auto rows = masim::experiments::run_sweep(spec, workers);
  masim::experiments::write_trials_csv(spec.out, rows);

  int optimal = 0;
  for (const auto& r : rows) {
    if (r.status == masim::socp::Status::Optimal) ++optimal;
  }
  std::cout << "wrote " << rows.size() << " rows to " << spec.out << " (" << optimal
            << " optimal)\n";
  return optimal > 0 ? 0 : kExitAllFailed;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
  const auto rows = masim::experiments::read_trials_csv(in_path);
  const auto cells = masim::experiments::aggregate(rows);
  masim::experiments::write_aggregate_csv(out_path, cells);
  std::cout << "wrote " << cells.size() << " aggregate rows to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"movable-antenna interference network simulator"};
  app.require_subcommand(1);

  std::string config_path, scheme_name, out_path;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run one scenario with one scheme");
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--scheme", scheme_name, "Proposed | MaMrt | FpaSocp | FpaMrt")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_path, "result JSON path (default: stdout)");

  std::string spec_path, sweep_out;
  std::optional<int> trials;
  int workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo parameter sweep");
  sweep->add_option("--spec", spec_path, "sweep spec JSON")->required();
  sweep->add_option("--trials", trials, "trials per swept value");
  sweep->add_option("--workers", workers, "worker threads (default: hardware)");
  sweep->add_option("--out", sweep_out, "trial CSV path (overrides spec)");

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "aggregate a trial CSV");
  report->add_option("--in", report_in, "trial CSV")->required();
  report->add_option("--out", report_out, "aggregate CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, scheme_name, seed, out_path);
    if (sweep->parsed()) return cmd_sweep(spec_path, trials, workers, sweep_out);
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const masim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
