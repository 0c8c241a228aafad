#pragma once

#include <utility>
#include <vector>

#include "masim/beamforming.hpp"
#include "masim/channel.hpp"
#include "masim/scenario.hpp"
#include "masim/socp.hpp"

namespace masim::position_opt {

/// Everything needed to express one link's gain |h_kj^H w_j|^2 as a function
/// of a single antenna position, with the other antennas frozen.
struct GainContext {
  Complex residual;        // accumulated term of the fixed antennas
  Complex weight;          // weight entry of the movable antenna
  CVec responses;          // per-path complex responses of the link
  Eigen::Matrix2Xd wave;   // per-path wave vectors (columns)
  double wavelength = 0.0;
  Eigen::MatrixXcd outer;  // |weight|^2 * responses responses^H
};

/// Sum over the other antennas of w_n' * conj(channel coefficient at t_n'):
/// the part of h^H w that does not move with antenna `antenna`.
Complex interference_residual(int antenna, const Eigen::Matrix2Xd& tx_positions,
                              const CVec& tx_weights, const PathSet& paths,
                              double wavelength);

GainContext make_gain_context(int antenna, const Eigen::Matrix2Xd& tx_positions,
                              const CVec& tx_weights, const PathSet& paths,
                              double wavelength);

/// The link gain |h^H w|^2 with the movable antenna at t, evaluated through
/// the expansion (constant + residual power + pairwise and cross cosine
/// terms). Agrees with direct channel evaluation to machine precision.
double gain_value(const Vec2& t, const GainContext& ctx);

/// Analytic gradient of gain_value with respect to t.
Vec2 gain_gradient(const Vec2& t, const GainContext& ctx);

/// Scalar curvature bound delta with delta * I >= Hessian(gain_value) at
/// every t: (16 pi^2 / lambda^2) * (sum_{a<b} max(1, ||p_b - p_a||^2/2) *
/// |outer(a,b)| + sum_l r_l), r_l = |residual| |weight| |response_l|.
double curvature_bound(const GainContext& ctx);

/// Quadratic sandwich around t0: value at t of the lower/upper surrogate
/// f(t0) + grad.(t - t0) -/+ (delta/2)||t - t0||^2.
std::pair<double, double> surrogate_interval(const Vec2& t, const Vec2& t0,
                                             const GainContext& ctx, double delta);

/// Affine minorant of ||t - other|| linearized at t0:
/// (t0 - other).(t - other) / ||t0 - other||. Throws when t0 == other.
double linearized_distance(const Vec2& t, const Vec2& t0, const Vec2& other);

struct StepResult {
  std::vector<Vec2> positions;  // new position of the chosen antenna, per transmitter
  double slack = std::numeric_limits<double>::quiet_NaN();  // achieved min margin, linear SINR units
  socp::Status status = socp::Status::NumericalFailure;
};

/// One convexified update of antenna index `antenna` across all transmitters:
/// maximizes the minimum surrogate SINR margin subject to the region box and
/// the linearized spacing constraints. Each user constraint is normalized by
/// its current interference-plus-noise so the slack is measured in linear
/// SINR units; at the entry point the slack equals the true minimum SINR
/// margin, hence the optimum can never be below it.
StepResult slack_max_step(int antenna, const PositionSet& positions,
                          const std::vector<CVec>& weights, const Scenario& scenario,
                          const Eigen::VectorXd& sinr_min,
                          const socp::SolveOptions& opts = {});

struct PositionOptOptions {
  int max_inner = 20;        // SCA iterations per antenna index
  double slack_tol = 1e-4;   // stop when the slack improves less than this
  socp::SolveOptions solver{1e-9, 1e-9, 100};
};

/// Sequential sweep over antenna indices, each running the SCA loop with
/// re-linearization, keeping every accepted iterate feasible for the true
/// constraints (positions in the region, true spacing >= D, true SINR margin
/// non-decreasing). Returns the input unchanged in the worst case.
PositionSet optimize_positions(const PositionSet& positions,
                               const std::vector<CVec>& weights,
                               const Scenario& scenario,
                               const Eigen::VectorXd& sinr_min,
                               const PositionOptOptions& opts = {});

}  // namespace masim::position_opt
