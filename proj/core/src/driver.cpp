#include "masim/driver.hpp"

#include <chrono>
#include <cmath>

#include "masim/hash.hpp"

namespace masim::driver {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_movable(Scheme s) { return s == Scheme::Proposed || s == Scheme::MaMrt; }
bool uses_socp(Scheme s) { return s == Scheme::Proposed || s == Scheme::FpaSocp; }

beamforming::Solution beam_step(Scheme scheme, const ChannelState& ch,
                                const Eigen::VectorXd& sinr_min,
                                const Eigen::VectorXd& noise,
                                const socp::SolveOptions& opts) {
  return uses_socp(scheme) ? beamforming::solve_min_power(ch, sinr_min, noise, opts)
                           : beamforming::mrt_power_control(ch, sinr_min, noise);
}

// Largest feasible target fraction for the MRT family, from the linearity of
// the scaled interference spectral radius in the targets.
double mrt_feasible_fraction(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                             const Eigen::VectorXd& noise) {
  std::vector<CVec> dirs;
  try {
    dirs = beamforming::mrt_directions(ch);
  } catch (const std::invalid_argument&) {
    return 0.0;
  }
  const int users = ch.users();
  Eigen::MatrixXd gains(users, users);
  for (int k = 0; k < users; ++k) {
    for (int j = 0; j < users; ++j) gains(k, j) = std::norm(ch.h[k][j].dot(dirs[j]));
  }
  const auto pc = beamforming::power_control(gains, sinr_min, noise);
  if (pc.feasible) return 1.0;
  if (!(pc.spectral_radius > 0.0) || !std::isfinite(pc.spectral_radius)) return 0.0;
  return std::min(1.0, 0.999 / pc.spectral_radius);
}

}  // namespace

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "Proposed";
    case Scheme::MaMrt: return "MaMrt";
    case Scheme::FpaSocp: return "FpaSocp";
    case Scheme::FpaMrt: return "FpaMrt";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "Proposed") return Scheme::Proposed;
  if (name == "MaMrt") return Scheme::MaMrt;
  if (name == "FpaSocp") return Scheme::FpaSocp;
  if (name == "FpaMrt") return Scheme::FpaMrt;
  throw ConfigError("unknown scheme: " + name +
                    " (expected Proposed, MaMrt, FpaSocp or FpaMrt)");
}

PositionSet initialize_positions(const Scenario& scenario) {
  const auto& c = scenario.config;
  const Eigen::Matrix2Xd grid = fpa_layout(c.antennas, c.wavelength, c.region_side());
  if (c.antennas > 1 && c.min_spacing() > 0.5 * c.wavelength * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "initialize_positions: half-wavelength grid violates the minimum spacing");
  }
  PositionSet positions;
  positions.tx.assign(static_cast<std::size_t>(c.pairs), grid);
  return positions;
}

std::uint64_t position_hash(const PositionSet& positions) {
  Fnv1a h;
  for (const auto& tx : positions.tx) {
    for (Eigen::Index i = 0; i < tx.size(); ++i) h.add(tx(i));
  }
  return h.value();
}

RunResult run(const Scenario& scenario, const AlgorithmOptions& options) {
  const auto& config = scenario.config;
  const int users = config.pairs;
  const Eigen::VectorXd sinr_min =
      Eigen::Map<const Eigen::VectorXd>(config.sinr_min.data(), users);
  const Eigen::VectorXd noise =
      Eigen::Map<const Eigen::VectorXd>(config.noise.data(), users);

  RunResult result;
  result.positions = initialize_positions(scenario);

  const auto t_start = Clock::now();
  ChannelState ch = channel_state(result.positions, scenario.paths, config.wavelength);
  beamforming::Solution sol =
      beam_step(options.scheme, ch, sinr_min, noise, options.beam_solver);

  if (sol.status != socp::Status::Optimal && is_movable(options.scheme) &&
      sol.status == socp::Status::Infeasible) {
    // Rescue: move the antennas under the largest feasible fraction of the
    // targets, then retry the full targets once.
    const double fraction =
        uses_socp(options.scheme)
            ? beamforming::max_feasible_fraction(ch, sinr_min, noise, options.beam_solver)
            : mrt_feasible_fraction(ch, sinr_min, noise);
    if (fraction > 0.0) {
      const Eigen::VectorXd scaled = fraction * sinr_min;
      beamforming::Solution partial =
          beam_step(options.scheme, ch, scaled, noise, options.beam_solver);
      if (partial.status == socp::Status::Optimal) {
        result.positions = position_opt::optimize_positions(
            result.positions, partial.weights, scenario, scaled, options.position);
        ch = channel_state(result.positions, scenario.paths, config.wavelength);
        sol = beam_step(options.scheme, ch, sinr_min, noise, options.beam_solver);
      }
    }
  }
  if (sol.status != socp::Status::Optimal) {
    result.status = sol.status;
    return result;
  }

  auto record = [&](const beamforming::Solution& s, Clock::time_point t0) {
    result.trace.push_back({s.total_power, (s.sinr - sinr_min).minCoeff(),
                            position_hash(result.positions), ms_since(t0)});
  };
  record(sol, t_start);

  if (is_movable(options.scheme)) {
    for (int outer = 0; outer < options.max_outer; ++outer) {
      const auto t_iter = Clock::now();
      result.positions = position_opt::optimize_positions(
          result.positions, sol.weights, scenario, sinr_min, options.position);
      ch = channel_state(result.positions, scenario.paths, config.wavelength);
      beamforming::Solution candidate =
          beam_step(options.scheme, ch, sinr_min, noise, options.beam_solver);

      if (candidate.status != socp::Status::Optimal ||
          candidate.total_power > sol.total_power * (1.0 + 1e-9)) {
        // The previous weights stay feasible at the moved antennas (the
        // position step never lowers their margins); keep them and stop.
        sol.sinr = beamforming::sinr(ch, sol.weights, noise);
        record(sol, t_iter);
        break;
      }
      const double previous = sol.total_power;
      sol = std::move(candidate);
      record(sol, t_iter);
      if (previous - sol.total_power < options.outer_tol * previous) break;
    }
  }

  result.beam = std::move(sol);
  result.status = socp::Status::Optimal;
  return result;
}

}  // namespace masim::driver
