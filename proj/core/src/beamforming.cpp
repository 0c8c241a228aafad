#include "masim/beamforming.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace masim::beamforming {

namespace {

// Real-stacked layout for the cone program: per transmitter j the weight
// occupies [2Nj, 2Nj+N) = Re(w_j) and [2Nj+N, 2Nj+2N) = Im(w_j); one extra
// variable (the norm epigraph) sits at index 2KN.
void real_inner_product_rows(const CVec& h, int offset, int n_vars,
                             Eigen::RowVectorXd& re_row, Eigen::RowVectorXd& im_row) {
  const int antennas = static_cast<int>(h.size());
  re_row = Eigen::RowVectorXd::Zero(n_vars);
  im_row = Eigen::RowVectorXd::Zero(n_vars);
  for (int n = 0; n < antennas; ++n) {
    // h^H w: Re = Re(h).Re(w) + Im(h).Im(w), Im = Re(h).Im(w) - Im(h).Re(w)
    re_row(offset + n) = h(n).real();
    re_row(offset + antennas + n) = h(n).imag();
    im_row(offset + n) = -h(n).imag();
    im_row(offset + antennas + n) = h(n).real();
  }
}

}  // namespace

Eigen::VectorXd sinr(const ChannelState& ch, const std::vector<CVec>& weights,
                     const Eigen::VectorXd& noise) {
  const int users = ch.users();
  if (static_cast<int>(weights.size()) != users || noise.size() != users) {
    throw std::invalid_argument("sinr: dimension mismatch");
  }
  Eigen::VectorXd out(users);
  for (int k = 0; k < users; ++k) {
    double interference = 0.0;
    for (int j = 0; j < users; ++j) {
      if (j == k) continue;
      interference += std::norm(ch.h[k][j].dot(weights[j]));
    }
    const double signal = std::norm(ch.h[k][k].dot(weights[k]));
    out(k) = signal / (interference + noise(k));
  }
  return out;
}

double min_sinr_margin(const ChannelState& ch, const std::vector<CVec>& weights,
                       const Eigen::VectorXd& sinr_min, const Eigen::VectorXd& noise) {
  return (sinr(ch, weights, noise) - sinr_min).minCoeff();
}

std::vector<CVec> mrt_directions(const ChannelState& ch) {
  std::vector<CVec> dirs(static_cast<std::size_t>(ch.users()));
  for (int j = 0; j < ch.users(); ++j) {
    const double nrm = ch.h[j][j].norm();
    if (nrm == 0.0) throw std::invalid_argument("mrt_directions: zero direct channel");
    dirs[j] = ch.h[j][j] / nrm;
  }
  return dirs;
}

PowerControlResult power_control(const Eigen::MatrixXd& gains,
                                 const Eigen::VectorXd& sinr_min,
                                 const Eigen::VectorXd& noise) {
  const int users = static_cast<int>(gains.rows());
  if (gains.cols() != users || sinr_min.size() != users || noise.size() != users) {
    throw std::invalid_argument("power_control: dimension mismatch");
  }
  PowerControlResult res;
  for (int k = 0; k < users; ++k) {
    if (!(gains(k, k) > 0.0)) return res;  // infeasible: no direct gain
  }
  // Scaled interference matrix B(k, j) = sinr_min_k * gains(k, j) / gains(k, k).
  Eigen::MatrixXd balance = Eigen::MatrixXd::Zero(users, users);
  Eigen::MatrixXd scaled = Eigen::MatrixXd::Zero(users, users);
  Eigen::VectorXd rhs(users);
  for (int k = 0; k < users; ++k) {
    balance(k, k) = gains(k, k);
    rhs(k) = sinr_min(k) * noise(k);
    for (int j = 0; j < users; ++j) {
      if (j == k) continue;
      balance(k, j) = -sinr_min(k) * gains(k, j);
      scaled(k, j) = sinr_min(k) * gains(k, j) / gains(k, k);
    }
  }
  res.spectral_radius = scaled.eigenvalues().cwiseAbs().maxCoeff();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(balance);
  if (!lu.isInvertible()) return res;
  res.power = lu.solve(rhs);
  res.feasible = res.spectral_radius < 1.0 && (res.power.array() > 0.0).all();
  return res;
}

Solution solve_min_power(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                         const Eigen::VectorXd& noise, const socp::SolveOptions& opts) {
  const int users = ch.users();
  const int antennas = static_cast<int>(ch.h[0][0].size());
  const int n_vars = 2 * users * antennas + 1;
  const int epigraph = n_vars - 1;

  socp::ConicProgram prog;
  prog.cost = Eigen::VectorXd::Zero(n_vars);
  prog.cost(epigraph) = 1.0;  // minimize ||all weights||

  // Norm epigraph cone: || stacked weights || <= u.
  {
    socp::SocConstraint cone;
    cone.A = Eigen::MatrixXd::Zero(n_vars - 1, n_vars);
    cone.A.topLeftCorner(n_vars - 1, n_vars - 1).setIdentity();
    cone.b = Eigen::VectorXd::Zero(n_vars - 1);
    cone.c = Eigen::VectorXd::Zero(n_vars);
    cone.c(epigraph) = 1.0;
    cone.d = 0.0;
    prog.cones.push_back(std::move(cone));
  }

  prog.eq_lhs = Eigen::MatrixXd::Zero(users, n_vars);
  prog.eq_rhs = Eigen::VectorXd::Zero(users);

  for (int k = 0; k < users; ++k) {
    const double sigma = std::sqrt(noise(k));
    socp::SocConstraint cone;
    cone.A = Eigen::MatrixXd::Zero(2 * (users - 1) + 1, n_vars);
    cone.b = Eigen::VectorXd::Zero(2 * (users - 1) + 1);
    int row = 0;
    Eigen::RowVectorXd re_row, im_row;
    for (int j = 0; j < users; ++j) {
      if (j == k) continue;
      real_inner_product_rows(ch.h[k][j], 2 * antennas * j, n_vars, re_row, im_row);
      cone.A.row(row++) = re_row / sigma;
      cone.A.row(row++) = im_row / sigma;
    }
    cone.b(row) = 1.0;  // the noise term, normalized to 1

    real_inner_product_rows(ch.h[k][k], 2 * antennas * k, n_vars, re_row, im_row);
    cone.c = re_row.transpose() / (sigma * std::sqrt(sinr_min(k)));
    cone.d = 0.0;
    prog.cones.push_back(std::move(cone));

    // Pin the direct inner product real (phase rotation, no optimality loss).
    prog.eq_lhs.row(k) = im_row / sigma;
  }

  const socp::ConicSolution sol = socp::solve(prog, opts);

  Solution out;
  out.status = sol.status;
  if (sol.status != socp::Status::Optimal) return out;

  out.weights.resize(static_cast<std::size_t>(users));
  double total = 0.0;
  for (int j = 0; j < users; ++j) {
    CVec w(antennas);
    for (int n = 0; n < antennas; ++n) {
      w(n) = Complex(sol.x(2 * antennas * j + n), sol.x(2 * antennas * j + antennas + n));
    }
    total += w.squaredNorm();
    out.weights[j] = std::move(w);
  }
  out.total_power = total;
  out.sinr = sinr(ch, out.weights, noise);
  return out;
}

Solution mrt_power_control(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                           const Eigen::VectorXd& noise) {
  const int users = ch.users();
  Solution out;
  std::vector<CVec> dirs;
  try {
    dirs = mrt_directions(ch);
  } catch (const std::invalid_argument&) {
    out.status = socp::Status::Infeasible;
    return out;
  }
  Eigen::MatrixXd gains(users, users);
  for (int k = 0; k < users; ++k) {
    for (int j = 0; j < users; ++j) {
      gains(k, j) = std::norm(ch.h[k][j].dot(dirs[j]));
    }
  }
  const PowerControlResult pc = power_control(gains, sinr_min, noise);
  if (!pc.feasible) {
    out.status = socp::Status::Infeasible;
    return out;
  }
  out.weights.resize(static_cast<std::size_t>(users));
  for (int j = 0; j < users; ++j) out.weights[j] = std::sqrt(pc.power(j)) * dirs[j];
  out.total_power = pc.power.sum();
  out.sinr = sinr(ch, out.weights, noise);
  out.status = socp::Status::Optimal;
  return out;
}

double max_feasible_fraction(const ChannelState& ch, const Eigen::VectorXd& sinr_min,
                             const Eigen::VectorXd& noise,
                             const socp::SolveOptions& opts, int bisect_iters) {
  const auto feasible = [&](double rho) {
    return solve_min_power(ch, rho * sinr_min, noise, opts).status == socp::Status::Optimal;
  };
  if (feasible(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < bisect_iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace masim::beamforming
