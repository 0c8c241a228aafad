#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masim/beamforming.hpp"
#include "masim/position_opt.hpp"
#include "masim/scenario.hpp"

namespace masim::driver {

/// Proposed: alternate optimal cone-program beamforming and antenna moves.
/// MaMrt:    alternate MRT + power control and antenna moves.
/// FpaSocp:  optimal beamforming once, antennas on the fixed grid.
/// FpaMrt:   MRT + power control once, antennas on the fixed grid.
enum class Scheme { Proposed, MaMrt, FpaSocp, FpaMrt };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);  // throws ConfigError

struct AlgorithmOptions {
  Scheme scheme = Scheme::Proposed;
  int max_outer = 30;
  double outer_tol = 1e-4;  // relative power change that counts as converged
  socp::SolveOptions beam_solver{};
  position_opt::PositionOptOptions position{};
};

struct IterationRecord {
  double power = std::numeric_limits<double>::quiet_NaN();  // watts
  double min_margin = std::numeric_limits<double>::quiet_NaN();  // linear SINR units
  std::uint64_t position_hash = 0;
  double wall_ms = 0.0;
};

struct RunResult {
  beamforming::Solution beam;
  PositionSet positions;
  std::vector<IterationRecord> trace;  // one record per outer iteration
  socp::Status status = socp::Status::NumericalFailure;
};

/// Half-wavelength grid, centred in each transmitter's region; the common
/// starting point of every scheme. Throws when the grid cannot satisfy the
/// region or spacing constraints.
PositionSet initialize_positions(const Scenario& scenario);

std::uint64_t position_hash(const PositionSet& positions);

/// Runs the selected scheme on one scenario. Movable-antenna schemes whose
/// first beamforming step is infeasible get one rescue attempt: targets are
/// scaled to the largest feasible fraction, the antennas are moved under the
/// scaled targets, and the full targets are tried once more.
RunResult run(const Scenario& scenario, const AlgorithmOptions& options);

}  // namespace masim::driver
