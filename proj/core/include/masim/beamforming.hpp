#pragma once

#include <vector>

#include "masim/channel.hpp"
#include "masim/socp.hpp"

namespace masim::beamforming {

/// Transmit weights for all transmitters plus the figures derived from them.
struct Solution {
  std::vector<CVec> weights;  // per transmitter, entries in sqrt(watt)
  double total_power = std::numeric_limits<double>::quiet_NaN();  // watts
  Eigen::VectorXd sinr;       // linear, per user, recomputed from the channel
  socp::Status status = socp::Status::NumericalFailure;
};

/// Per-user SINR: |h_kk^H w_k|^2 / (sum_{j!=k} |h_kj^H w_j|^2 + noise_k).
Eigen::VectorXd sinr(const ChannelState& ch, const std::vector<CVec>& weights,
                     const Eigen::VectorXd& noise);

/// min_k (sinr_k - sinr_min_k), the slack of the tightest SINR constraint.
double min_sinr_margin(const ChannelState& ch, const std::vector<CVec>& weights,
                       const Eigen::VectorXd& sinr_min, const Eigen::VectorXd& noise);

/// Unit-norm maximum-ratio directions h_jj / ||h_jj||. Throws on a zero
/// direct channel.
std::vector<CVec> mrt_directions(const ChannelState& ch);

struct PowerControlResult {
  Eigen::VectorXd power;  // watts, meets every SINR target with equality
  bool feasible = false;
  double spectral_radius = std::numeric_limits<double>::quiet_NaN();
};

/// Power allocation for fixed beam directions with effective gains
/// gains(k, j) = |h_kj^H u_j|^2: solves the K x K balance equations
/// p_k gains(k,k) = sinr_min_k (sum_{j!=k} p_j gains(k,j) + noise_k).
/// Infeasible when the solution is not strictly positive or the scaled
/// interference matrix has spectral radius >= 1.
PowerControlResult power_control(const Eigen::MatrixXd& gains,
                                 const Eigen::VectorXd& sinr_min,
                                 const Eigen::VectorXd& noise);

/// Optimal total-power minimization under per-user SINR constraints for
/// fixed antenna positions, solved as one second-order cone program: each
/// user's constraint becomes sqrt(1/gamma) Re(h_kk^H w_k) >= || (cross
/// terms, noise) ||, with the direct inner product pinned real by an
/// equality (a phase rotation without loss of optimality).
Solution solve_min_power(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                         const Eigen::VectorXd& noise,
                         const socp::SolveOptions& opts = {});

/// MRT directions plus power control, packaged as a Solution.
Solution mrt_power_control(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                           const Eigen::VectorXd& noise);

/// Largest fraction rho in [0, 1] such that targets rho * sinr_min are
/// feasible, via bisection on solve_min_power. Returns 1 when the full
/// targets are already feasible and 0 when no fraction could be certified.
double max_feasible_fraction(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                             const Eigen::VectorXd& noise,
                             const socp::SolveOptions& opts = {}, int bisect_iters = 20);

}  // namespace masim::beamforming
