#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "masim/driver.hpp"
#include "masim/scenario.hpp"

namespace masim::experiments {

/// The four sweepable instance parameters, named as they appear in spec
/// files and result CSVs: "L", "A_over_lambda", "N", "K".
enum class SweepParam { Paths, RegionSize, Antennas, Pairs };

const char* to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& name);  // throws ConfigError

/// A full study: one swept parameter over a list of values, a fixed number
/// of Monte Carlo trials per value, and the schemes to compare. JSON keys:
/// base (scenario config object), param, values, trials, schemes, out;
/// unknown keys rejected.
struct SweepSpec {
  ScenarioConfig base;
  SweepParam param = SweepParam::Paths;
  std::vector<double> values;
  int trials = 100;
  std::vector<driver::Scheme> schemes;
  std::string out;
};

SweepSpec sweep_spec_from_json(const nlohmann::json& doc);

struct TrialResult {
  SweepParam param = SweepParam::Paths;
  double value = 0.0;
  driver::Scheme scheme = driver::Scheme::Proposed;
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t scenario_hash = 0;
  socp::Status status = socp::Status::NumericalFailure;
  double power_dbm = std::numeric_limits<double>::quiet_NaN();
  int iters = 0;
  double wall_ms = 0.0;
};

/// Applies one swept value to the base config (validating integrality for
/// the integer parameters, broadcasting per-user vectors for a K sweep).
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParam param,
                                 double value);

/// Runs the whole study. Trials are independent work items on a bounded
/// worker pool (workers <= 0 picks the hardware concurrency); the scenario
/// for (value, trial) is built once with seed base.seed + trial and shared
/// by every scheme, and results come back in a fixed order regardless of
/// scheduling.
std::vector<TrialResult> run_sweep(const SweepSpec& spec, int workers = 0);

struct AggregateRow {
  SweepParam param = SweepParam::Paths;
  double value = 0.0;
  driver::Scheme scheme = driver::Scheme::Proposed;
  int trials = 0;
  int optimal = 0;
  double feasibility_rate = 0.0;
  double mean_power_dbm = std::numeric_limits<double>::quiet_NaN();
  double ci95_dbm = std::numeric_limits<double>::quiet_NaN();
};

/// Mean power in dBm over the Optimal trials of every (value, scheme) cell,
/// with a 95% normal-approximation half-width. Cells with no Optimal trial
/// keep NaN means and are reported by their feasibility rate alone.
std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& rows);

double to_dbm(double watts);

void write_trials_csv(const std::string& path, const std::vector<TrialResult>& rows);
std::vector<TrialResult> read_trials_csv(const std::string& path);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);

}  // namespace masim::experiments
