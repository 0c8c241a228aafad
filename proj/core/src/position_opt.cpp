#include "masim/position_opt.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace masim::position_opt {

namespace {

constexpr double kPi = std::numbers::pi;

double wavenumber(double wavelength) { return 2.0 * kPi / wavelength; }

}  // namespace

Complex interference_residual(int antenna, const Eigen::Matrix2Xd& tx_positions,
                              const CVec& tx_weights, const PathSet& paths,
                              double wavelength) {
  if (antenna < 0 || antenna >= tx_positions.cols() ||
      tx_weights.size() != tx_positions.cols()) {
    throw std::invalid_argument("interference_residual: bad antenna index or weights");
  }
  Complex acc(0.0, 0.0);
  for (Eigen::Index m = 0; m < tx_positions.cols(); ++m) {
    if (m == antenna) continue;
    acc += tx_weights(m) *
           std::conj(channel_coefficient(tx_positions.col(m), paths, wavelength));
  }
  return acc;
}

GainContext make_gain_context(int antenna, const Eigen::Matrix2Xd& tx_positions,
                              const CVec& tx_weights, const PathSet& paths,
                              double wavelength) {
  GainContext ctx;
  ctx.residual = interference_residual(antenna, tx_positions, tx_weights, paths, wavelength);
  ctx.weight = tx_weights(antenna);
  ctx.responses = paths.responses();
  ctx.wave = paths.wave_vectors();
  ctx.wavelength = wavelength;
  ctx.outer = std::norm(ctx.weight) * (ctx.responses * ctx.responses.adjoint());
  return ctx;
}

double gain_value(const Vec2& t, const GainContext& ctx) {
  const double k0 = wavenumber(ctx.wavelength);
  const int paths = static_cast<int>(ctx.responses.size());
  const double w2 = std::norm(ctx.weight);
  const double gmag = std::abs(ctx.residual);
  const double cross_phase = -std::arg(ctx.residual) + std::arg(ctx.weight);

  double acc = w2 * ctx.responses.squaredNorm() + gmag * gmag;
  for (int a = 0; a < paths; ++a) {
    for (int b = a + 1; b < paths; ++b) {
      const double mod = w2 * std::abs(ctx.responses(a)) * std::abs(ctx.responses(b));
      const double ang = k0 * t.dot(ctx.wave.col(b) - ctx.wave.col(a)) +
                         std::arg(ctx.responses(a)) - std::arg(ctx.responses(b));
      acc += 2.0 * mod * std::cos(ang);
    }
  }
  for (int l = 0; l < paths; ++l) {
    const double r = gmag * std::abs(ctx.weight) * std::abs(ctx.responses(l));
    const double ang = k0 * t.dot(ctx.wave.col(l)) + cross_phase - std::arg(ctx.responses(l));
    acc += 2.0 * r * std::cos(ang);
  }
  return acc;
}

Vec2 gain_gradient(const Vec2& t, const GainContext& ctx) {
  const double k0 = wavenumber(ctx.wavelength);
  const int paths = static_cast<int>(ctx.responses.size());
  const double w2 = std::norm(ctx.weight);
  const double gmag = std::abs(ctx.residual);
  const double cross_phase = -std::arg(ctx.residual) + std::arg(ctx.weight);

  Vec2 grad = Vec2::Zero();
  for (int a = 0; a < paths; ++a) {
    for (int b = a + 1; b < paths; ++b) {
      const Vec2 dir = ctx.wave.col(b) - ctx.wave.col(a);
      const double mod = w2 * std::abs(ctx.responses(a)) * std::abs(ctx.responses(b));
      const double ang = k0 * t.dot(dir) + std::arg(ctx.responses(a)) - std::arg(ctx.responses(b));
      grad -= 2.0 * mod * std::sin(ang) * k0 * dir;
    }
  }
  for (int l = 0; l < paths; ++l) {
    const double r = gmag * std::abs(ctx.weight) * std::abs(ctx.responses(l));
    const double ang = k0 * t.dot(ctx.wave.col(l)) + cross_phase - std::arg(ctx.responses(l));
    grad -= 2.0 * r * std::sin(ang) * k0 * ctx.wave.col(l);
  }
  return grad;
}

double curvature_bound(const GainContext& ctx) {
  // The Hessian is a signed sum of rank-one terms: (p_b - p_a)(p_b - p_a)^T
  // with coefficient magnitude <= 2|outer(a,b)| per path pair, and
  // p_l p_l^T with magnitude <= 2 r_l per path. Its spectral norm is
  // therefore at most (8 pi^2/lambda^2) (sum |outer(a,b)| ||p_b - p_a||^2 +
  // sum r_l ||p_l||^2). The per-pair factor max(1, ||p_b - p_a||^2 / 2)
  // keeps the bound valid when the wave-vector difference exceeds the unit
  // square that the plain 16 pi^2/lambda^2 constant would assume.
  const int paths = static_cast<int>(ctx.responses.size());
  const double w2 = std::norm(ctx.weight);
  const double gmag = std::abs(ctx.residual);
  double pair_sum = 0.0;
  for (int a = 0; a < paths; ++a) {
    for (int b = a + 1; b < paths; ++b) {
      const double spread = (ctx.wave.col(b) - ctx.wave.col(a)).squaredNorm();
      pair_sum += std::max(1.0, 0.5 * spread) * w2 * std::abs(ctx.responses(a)) *
                  std::abs(ctx.responses(b));
    }
  }
  double cross_sum = 0.0;
  for (int l = 0; l < paths; ++l) {
    cross_sum += gmag * std::abs(ctx.weight) * std::abs(ctx.responses(l));
  }
  const double k0 = wavenumber(ctx.wavelength);
  return 4.0 * k0 * k0 * (pair_sum + cross_sum);
}

std::pair<double, double> surrogate_interval(const Vec2& t, const Vec2& t0,
                                             const GainContext& ctx, double delta) {
  const double lin = gain_value(t0, ctx) + gain_gradient(t0, ctx).dot(t - t0);
  const double quad = 0.5 * delta * (t - t0).squaredNorm();
  return {lin - quad, lin + quad};
}

double linearized_distance(const Vec2& t, const Vec2& t0, const Vec2& other) {
  const double dist = (t0 - other).norm();
  if (!(dist > 0.0)) {
    throw std::invalid_argument("linearized_distance: reference points coincide");
  }
  return (t0 - other).dot(t - other) / dist;
}

StepResult slack_max_step(int antenna, const PositionSet& positions,
                          const std::vector<CVec>& weights, const Scenario& scenario,
                          const Eigen::VectorXd& sinr_min, const socp::SolveOptions& opts) {
  const int users = scenario.config.pairs;
  const double lambda = scenario.config.wavelength;
  const double side_w = scenario.config.region;           // box side, wavelengths
  const double spacing_w = scenario.config.min_spacing() / lambda;

  StepResult result;
  result.positions.resize(static_cast<std::size_t>(users));

  // Per-link surrogate data at the current iterate (positions in wavelengths,
  // gradients and curvatures rescaled accordingly).
  std::vector<std::vector<double>> value(users, std::vector<double>(users));
  std::vector<std::vector<Vec2>> grad(users, std::vector<Vec2>(users));
  std::vector<std::vector<double>> curv(users, std::vector<double>(users));
  for (int k = 0; k < users; ++k) {
    for (int j = 0; j < users; ++j) {
      const GainContext ctx = make_gain_context(antenna, positions.tx[j], weights[j],
                                                scenario.paths[k][j], lambda);
      const Vec2 t0 = positions.tx[j].col(antenna);
      value[k][j] = gain_value(t0, ctx);
      grad[k][j] = lambda * gain_gradient(t0, ctx);
      curv[k][j] = lambda * lambda * curvature_bound(ctx);
    }
  }

  // Variables: [t_1 (2), ..., t_K (2), q_1, ..., q_K, margin]; positions in
  // wavelengths, q_j an epigraph of ||t_j - t_j^0||^2.
  const int n_vars = 3 * users + 1;
  const int margin_ix = n_vars - 1;
  const auto t_ix = [](int j) { return 2 * j; };
  const auto q_ix = [users](int j) { return 2 * users + j; };

  socp::ConicProgram prog;
  prog.cost = Eigen::VectorXd::Zero(n_vars);
  prog.cost(margin_ix) = -1.0;  // maximize the margin

  prog.lower = Eigen::VectorXd::Constant(n_vars, -std::numeric_limits<double>::infinity());
  prog.upper = Eigen::VectorXd::Constant(n_vars, std::numeric_limits<double>::infinity());
  for (int j = 0; j < users; ++j) {
    prog.lower.segment(t_ix(j), 2).setZero();
    prog.upper.segment(t_ix(j), 2).setConstant(side_w);
    prog.lower(q_ix(j)) = 0.0;
    prog.upper(q_ix(j)) = 2.0 * side_w * side_w + 1.0;
  }

  std::vector<Vec2> entry(static_cast<std::size_t>(users));
  for (int j = 0; j < users; ++j) {
    entry[j] = positions.tx[j].col(antenna) / lambda;
    socp::ConvexQuadratic epi;
    epi.curvature = 2.0;  // ||t_j - t_j^0||^2 <= q_j
    epi.idx = {t_ix(j), t_ix(j) + 1};
    epi.center = entry[j];
    epi.lin = Eigen::VectorXd::Zero(n_vars);
    epi.lin(q_ix(j)) = 1.0;
    epi.offset = 0.0;
    prog.cones.push_back(socp::quadratic_to_soc(epi, n_vars));
  }

  // One normalized SINR row per user: the surrogate lower bound of the
  // desired gain minus target times the surrogate upper bound of
  // interference-plus-noise, divided by the current interference-plus-noise.
  for (int k = 0; k < users; ++k) {
    double denom = scenario.config.noise[k];
    for (int j = 0; j < users; ++j) {
      if (j != k) denom += value[k][j];
    }
    socp::SocConstraint row;
    row.A = Eigen::MatrixXd(0, n_vars);
    row.b = Eigen::VectorXd(0);
    row.c = Eigen::VectorXd::Zero(n_vars);
    double constant = value[k][k] - grad[k][k].dot(entry[k]) -
                      sinr_min(k) * scenario.config.noise[k];
    row.c.segment(t_ix(k), 2) = grad[k][k];
    row.c(q_ix(k)) = -0.5 * curv[k][k];
    for (int j = 0; j < users; ++j) {
      if (j == k) continue;
      constant -= sinr_min(k) * (value[k][j] - grad[k][j].dot(entry[j]));
      row.c.segment(t_ix(j), 2) -= sinr_min(k) * grad[k][j];
      row.c(q_ix(j)) -= 0.5 * sinr_min(k) * curv[k][j];
    }
    row.c /= denom;
    row.c(margin_ix) = -1.0;
    row.d = constant / denom;
    prog.cones.push_back(std::move(row));
  }

  // Linearized spacing against the frozen antennas of the same transmitter.
  for (int j = 0; j < users; ++j) {
    for (Eigen::Index m = 0; m < positions.tx[j].cols(); ++m) {
      if (m == antenna) continue;
      const Vec2 other = positions.tx[j].col(m) / lambda;
      const Vec2 diff = entry[j] - other;
      const double dist = diff.norm();
      if (!(dist > 0.0)) {
        throw std::logic_error("slack_max_step: coincident antennas in the entry iterate");
      }
      const Vec2 dir = diff / dist;
      socp::SocConstraint row;
      row.A = Eigen::MatrixXd(0, n_vars);
      row.b = Eigen::VectorXd(0);
      row.c = Eigen::VectorXd::Zero(n_vars);
      row.c.segment(t_ix(j), 2) = dir;
      row.d = -dir.dot(other) - spacing_w;
      prog.cones.push_back(std::move(row));
    }
  }

  const socp::ConicSolution sol = socp::solve(prog, opts);
  result.status = sol.status;
  if (sol.status != socp::Status::Optimal) return result;

  result.slack = sol.x(margin_ix);
  for (int j = 0; j < users; ++j) {
    Vec2 t = sol.x.segment(t_ix(j), 2);
    t = t.cwiseMax(0.0).cwiseMin(side_w);  // exact box membership
    result.positions[j] = lambda * t;
  }
  return result;
}

PositionSet optimize_positions(const PositionSet& positions,
                               const std::vector<CVec>& weights,
                               const Scenario& scenario,
                               const Eigen::VectorXd& sinr_min,
                               const PositionOptOptions& opts) {
  PositionSet current = positions;
  const int users = scenario.config.pairs;
  const int antennas = current.antennas();
  const double lambda = scenario.config.wavelength;
  const double spacing = scenario.config.min_spacing();
  const Eigen::VectorXd noise =
      Eigen::Map<const Eigen::VectorXd>(scenario.config.noise.data(), users);

  double margin = beamforming::min_sinr_margin(
      channel_state(current, scenario.paths, lambda), weights, sinr_min, noise);

  for (int n = 0; n < antennas; ++n) {
    double prev_slack = -std::numeric_limits<double>::infinity();
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      const StepResult step = slack_max_step(n, current, weights, scenario, sinr_min, opts.solver);
      if (step.status != socp::Status::Optimal) break;

      PositionSet candidate = current;
      for (int j = 0; j < users; ++j) candidate.tx[j].col(n) = step.positions[j];

      // Accept only steps that hold up under the true (non-surrogate)
      // constraints: spacing and minimum SINR margin.
      bool spacing_ok = true;
      for (int j = 0; j < users && spacing_ok; ++j) {
        for (Eigen::Index m = 0; m < antennas && spacing_ok; ++m) {
          if (m == n) continue;
          spacing_ok = (candidate.tx[j].col(n) - candidate.tx[j].col(m)).norm() >=
                       spacing - 1e-9;
        }
      }
      if (!spacing_ok) break;
      const double cand_margin = beamforming::min_sinr_margin(
          channel_state(candidate, scenario.paths, lambda), weights, sinr_min, noise);
      if (cand_margin < margin - 1e-12 * std::max(1.0, std::abs(margin))) break;

      current = std::move(candidate);
      margin = cand_margin;
      if (step.slack - prev_slack < opts.slack_tol) break;
      prev_slack = step.slack;
    }
  }
  return current;
}

}  // namespace masim::position_opt
