#include "masim/socp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

// Primal-dual interior-point method for the self-dual-free embedding
//
//   minimize    c.x
//   subject to  A x = b
//               G x + s = h,   s in K = R+^l x Q_q1 x ... x Q_qM
//
// following the classic cone-LP recipe: Nesterov-Todd scaling of the
// (s, z) pair, Mehrotra predictor-corrector steps, dense reduced KKT
//
//   [ Gt'Gt + eps   A' ] [dx]      with Gt = W^{-1} G,
//   [ A           -eps ] [dy]
//
// one round of iterative refinement against the unregularized system, and
// pragmatic infeasibility detection through the standard certificates
// (b'y + h'z < 0 with small dual residual => primal infeasible).

namespace masim::socp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStaticReg = 1e-11;
constexpr double kStepScale = 0.99;

const char* status_names[] = {"Optimal", "Infeasible", "MaxIter", "NumericalFailure"};

// ---------------------------------------------------------------------------
// Cone layout: the slack vector is [lp rows | soc block 1 | soc block 2 ...].

struct ConeLayout {
  int lp = 0;
  std::vector<int> soc;  // block sizes, each >= 2

  int rows() const {
    int r = lp;
    for (int q : soc) r += q;
    return r;
  }
  int degree() const { return lp + static_cast<int>(soc.size()); }
};

// Identity element of the cone product.
Eigen::VectorXd cone_identity(const ConeLayout& cones) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(cones.rows());
  e.head(cones.lp).setOnes();
  int at = cones.lp;
  for (int q : cones.soc) {
    e(at) = 1.0;
    at += q;
  }
  return e;
}

// Smallest t such that u + t*e lies in K (negative iff u is interior).
double max_step(const ConeLayout& cones, const Eigen::VectorXd& u) {
  double t = -kInf;
  for (int i = 0; i < cones.lp; ++i) t = std::max(t, -u(i));
  int at = cones.lp;
  for (int q : cones.soc) {
    t = std::max(t, u.segment(at + 1, q - 1).norm() - u(at));
    at += q;
  }
  return t;
}

// Largest step in [0, inf) keeping u + alpha*du inside K.
double step_to_boundary(const ConeLayout& cones, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& du) {
  double alpha = kInf;
  for (int i = 0; i < cones.lp; ++i) {
    if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
  }
  int at = cones.lp;
  for (int q : cones.soc) {
    const double u0 = u(at), d0 = du(at);
    const auto u1 = u.segment(at + 1, q - 1);
    const auto d1 = du.segment(at + 1, q - 1);
    // Roots of (u0 + a d0)^2 = ||u1 + a d1||^2 with the cone entered at a=0.
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = 2.0 * (u0 * d0 - u1.dot(d1));
    const double c = u0 * u0 - u1.squaredNorm();
    double root = kInf;
    if (std::abs(a) < 1e-14 * (std::abs(b) + std::abs(c) + 1.0)) {
      if (b < 0.0) root = -c / b;
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double r : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
          if (r > 0.0) root = std::min(root, r);
        }
      }
    }
    alpha = std::min(alpha, root);
    at += q;
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling. For each SOC block W = beta * (2 v v' - J) with
// v'Jv = 1, J = diag(1, -I); for the LP block W = diag(w).

struct Scaling {
  Eigen::VectorXd lp_w;
  struct Soc {
    double beta = 1.0;
    Eigen::VectorXd v;
  };
  std::vector<Soc> soc;
};

Eigen::VectorXd jmul(const Eigen::VectorXd& u) {  // J u
  Eigen::VectorXd r = -u;
  r(0) = u(0);
  return r;
}

bool compute_scaling(const ConeLayout& cones, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& z, Scaling& w,
                     Eigen::VectorXd& lambda) {
  w.lp_w.resize(cones.lp);
  for (int i = 0; i < cones.lp; ++i) {
    if (s(i) <= 0.0 || z(i) <= 0.0) return false;
    w.lp_w(i) = std::sqrt(s(i) / z(i));
    lambda(i) = std::sqrt(s(i) * z(i));
  }
  w.soc.resize(cones.soc.size());
  int at = cones.lp;
  for (std::size_t m = 0; m < cones.soc.size(); ++m) {
    const int q = cones.soc[m];
    const auto sb = s.segment(at, q);
    const auto zb = z.segment(at, q);
    const double snrm2 = sb(0) * sb(0) - sb.tail(q - 1).squaredNorm();
    const double znrm2 = zb(0) * zb(0) - zb.tail(q - 1).squaredNorm();
    if (snrm2 <= 0.0 || znrm2 <= 0.0) return false;
    const double sn = std::sqrt(snrm2), zn = std::sqrt(znrm2);
    const Eigen::VectorXd sbar = sb / sn;
    const Eigen::VectorXd zbar = zb / zn;
    // gamma normalizes w so that w'Jw = 1; note the plain inner product.
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Eigen::VectorXd wbar = (sbar + jmul(zbar)) / (2.0 * gamma);
    Scaling::Soc blk;
    blk.beta = std::sqrt(sn / zn);
    blk.v = wbar;
    blk.v(0) += 1.0;
    blk.v /= std::sqrt(2.0 * (wbar(0) + 1.0));
    w.soc[m] = blk;
    // lambda = W z, computed directly from the representation.
    const Eigen::VectorXd& v = w.soc[m].v;
    lambda.segment(at, q) = blk.beta * (2.0 * v * v.dot(zb) - jmul(zb));
    at += q;
  }
  return true;
}

// W u (W symmetric).
Eigen::VectorXd apply_w(const ConeLayout& cones, const Scaling& w,
                        const Eigen::VectorXd& u) {
  Eigen::VectorXd r(u.size());
  r.head(cones.lp) = w.lp_w.cwiseProduct(u.head(cones.lp));
  int at = cones.lp;
  for (std::size_t m = 0; m < cones.soc.size(); ++m) {
    const int q = cones.soc[m];
    const Eigen::VectorXd& v = w.soc[m].v;
    const auto ub = u.segment(at, q);
    r.segment(at, q) = w.soc[m].beta * (2.0 * v * v.dot(ub) - jmul(ub));
    at += q;
  }
  return r;
}

// W^{-1} u = (1/beta) (2 (Jv)(Jv)' - J) u per SOC block.
Eigen::VectorXd apply_winv(const ConeLayout& cones, const Scaling& w,
                           const Eigen::VectorXd& u) {
  Eigen::VectorXd r(u.size());
  r.head(cones.lp) = u.head(cones.lp).cwiseQuotient(w.lp_w);
  int at = cones.lp;
  for (std::size_t m = 0; m < cones.soc.size(); ++m) {
    const int q = cones.soc[m];
    const Eigen::VectorXd jv = jmul(w.soc[m].v);
    const auto ub = u.segment(at, q);
    r.segment(at, q) = (2.0 * jv * jv.dot(ub) - jmul(ub)) / w.soc[m].beta;
    at += q;
  }
  return r;
}

// Jordan product u o v.
Eigen::VectorXd jordan_prod(const ConeLayout& cones, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v) {
  Eigen::VectorXd r(u.size());
  r.head(cones.lp) = u.head(cones.lp).cwiseProduct(v.head(cones.lp));
  int at = cones.lp;
  for (int q : cones.soc) {
    const auto ub = u.segment(at, q);
    const auto vb = v.segment(at, q);
    r(at) = ub.dot(vb);
    r.segment(at + 1, q - 1) = ub(0) * vb.tail(q - 1) + vb(0) * ub.tail(q - 1);
    at += q;
  }
  return r;
}

// Solve lam o r = u for r.
Eigen::VectorXd jordan_solve(const ConeLayout& cones, const Eigen::VectorXd& lam,
                             const Eigen::VectorXd& u) {
  Eigen::VectorXd r(u.size());
  r.head(cones.lp) = u.head(cones.lp).cwiseQuotient(lam.head(cones.lp));
  int at = cones.lp;
  for (int q : cones.soc) {
    const auto lb = lam.segment(at, q);
    const auto ub = u.segment(at, q);
    const double det = lb(0) * lb(0) - lb.tail(q - 1).squaredNorm();
    const double r0 = (ub(0) * lb(0) - lb.tail(q - 1).dot(ub.tail(q - 1))) / det;
    r(at) = r0;
    r.segment(at + 1, q - 1) = (ub.tail(q - 1) - r0 * lb.tail(q - 1)) / lb(0);
    at += q;
  }
  return r;
}

// ---------------------------------------------------------------------------

struct ConeLp {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;  // p x n
  Eigen::VectorXd b;
  Eigen::MatrixXd G;  // m x n
  Eigen::VectorXd h;
  ConeLayout cones;
};

// Flattens the user-facing program into [lp | soc] conic standard form.
// LP rows: finite bounds first, then degenerate (affine) cones.
ConeLp flatten(const ConicProgram& prog) {
  const int n = prog.num_vars();
  ConeLp lp;
  lp.c = prog.cost;
  lp.A = prog.eq_lhs.rows() > 0 ? prog.eq_lhs : Eigen::MatrixXd(0, n);
  lp.b = prog.eq_rhs;

  int lp_rows = 0;
  const bool boxed = prog.lower.size() == n;
  if (boxed) {
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(prog.lower(i))) ++lp_rows;
      if (std::isfinite(prog.upper(i))) ++lp_rows;
    }
  }
  int soc_rows = 0;
  for (const auto& cone : prog.cones) {
    if (cone.A.rows() == 0) {
      ++lp_rows;
    } else {
      soc_rows += static_cast<int>(cone.A.rows()) + 1;
    }
  }
  lp.G = Eigen::MatrixXd::Zero(lp_rows + soc_rows, n);
  lp.h = Eigen::VectorXd::Zero(lp_rows + soc_rows);
  lp.cones.lp = lp_rows;

  int r = 0;
  if (boxed) {
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(prog.lower(i))) {  // x_i - lower >= 0
        lp.G(r, i) = -1.0;
        lp.h(r) = -prog.lower(i);
        ++r;
      }
      if (std::isfinite(prog.upper(i))) {  // upper - x_i >= 0
        lp.G(r, i) = 1.0;
        lp.h(r) = prog.upper(i);
        ++r;
      }
    }
  }
  for (const auto& cone : prog.cones) {
    if (cone.A.rows() == 0) {  // c.x + d >= 0
      lp.G.row(r) = -cone.c.transpose();
      lp.h(r) = cone.d;
      ++r;
    }
  }
  for (const auto& cone : prog.cones) {
    const int rows = static_cast<int>(cone.A.rows());
    if (rows == 0) continue;
    lp.G.row(r) = -cone.c.transpose();
    lp.h(r) = cone.d;
    lp.G.block(r + 1, 0, rows, n) = -cone.A;
    lp.h.segment(r + 1, rows) = cone.b;
    lp.cones.soc.push_back(rows + 1);
    r += rows + 1;
  }
  return lp;
}

struct KktSolver {
  const ConeLp& lp;
  const Scaling* scaling = nullptr;  // null => identity scaling
  Eigen::MatrixXd Gt;                // W^{-1} G
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  explicit KktSolver(const ConeLp& p) : lp(p) {}

  void factor(const Scaling* w) {
    scaling = w;
    const int n = static_cast<int>(lp.c.size());
    const int p = static_cast<int>(lp.A.rows());
    if (w != nullptr) {
      Gt.resize(lp.G.rows(), n);
      for (int j = 0; j < n; ++j) Gt.col(j) = apply_winv(lp.cones, *w, lp.G.col(j));
    } else {
      Gt = lp.G;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + p, n + p);
    M.topLeftCorner(n, n) = Gt.transpose() * Gt;
    M.topLeftCorner(n, n).diagonal().array() += kStaticReg;
    if (p > 0) {
      M.topRightCorner(n, p) = lp.A.transpose();
      M.bottomLeftCorner(p, n) = lp.A;
      M.bottomRightCorner(p, p).diagonal().array() -= kStaticReg;
    }
    lu.compute(M);
  }

  Eigen::VectorXd winv(const Eigen::VectorXd& u) const {
    return scaling != nullptr ? apply_winv(lp.cones, *scaling, u) : u;
  }
  Eigen::VectorXd wmul(const Eigen::VectorXd& u) const {
    return scaling != nullptr ? apply_w(lp.cones, *scaling, u) : u;
  }

  // Solves the 3x3 KKT system
  //   A' dy + G' dz            = bx
  //   A dx                     = by
  //   G dx          -W'W dz   = bz
  // with one refinement pass against the unregularized blocks.
  void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
             const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
             Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
    const int n = static_cast<int>(lp.c.size());
    const int p = static_cast<int>(lp.A.rows());
    auto reduce_and_solve = [&](const Eigen::VectorXd& rx, const Eigen::VectorXd& ry,
                                const Eigen::VectorXd& rz, Eigen::VectorXd& ox,
                                Eigen::VectorXd& oy, Eigen::VectorXd& oz) {
      const Eigen::VectorXd rzt = winv(rz);
      Eigen::VectorXd rhs(n + p);
      rhs.head(n) = rx + Gt.transpose() * rzt;
      if (p > 0) rhs.tail(p) = ry;
      const Eigen::VectorXd sol = lu.solve(rhs);
      ox = sol.head(n);
      oy = p > 0 ? sol.tail(p) : Eigen::VectorXd(0);
      oz = winv(Gt * ox - rzt);
    };
    reduce_and_solve(bx, by, bz, dx, dy, dz);
    // Refinement: residuals of the exact system.
    Eigen::VectorXd r1 = bx - lp.G.transpose() * dz;
    if (p > 0) r1 -= lp.A.transpose() * dy;
    Eigen::VectorXd r2 = p > 0 ? Eigen::VectorXd(by - lp.A * dx) : Eigen::VectorXd(0);
    Eigen::VectorXd r3 = bz - (lp.G * dx - wmul(wmul(dz)));
    Eigen::VectorXd cx, cy, cz;
    reduce_and_solve(r1, r2, r3, cx, cy, cz);
    dx += cx;
    if (p > 0) dy += cy;
    dz += cz;
  }
};

bool all_finite(const ConicProgram& prog) {
  if (!prog.cost.allFinite()) return false;
  if (prog.eq_lhs.size() > 0 && !prog.eq_lhs.allFinite()) return false;
  if (prog.eq_rhs.size() > 0 && !prog.eq_rhs.allFinite()) return false;
  for (const auto& cone : prog.cones) {
    if (cone.A.size() > 0 && !cone.A.allFinite()) return false;
    if (cone.b.size() > 0 && !cone.b.allFinite()) return false;
    if (!cone.c.allFinite() || !std::isfinite(cone.d)) return false;
  }
  // Box bounds may contain +-inf by design; NaN is rejected.
  for (int i = 0; i < prog.lower.size(); ++i) {
    if (std::isnan(prog.lower(i)) || std::isnan(prog.upper(i))) return false;
  }
  return true;
}

}  // namespace

const char* to_string(Status s) { return status_names[static_cast<int>(s)]; }

double max_violation(const ConicProgram& prog, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (prog.eq_lhs.rows() > 0) {
    v = (prog.eq_lhs * x - prog.eq_rhs).cwiseAbs().maxCoeff();
  }
  for (const auto& cone : prog.cones) {
    const double rhs = cone.c.dot(x) + cone.d;
    const double lhs = cone.A.rows() > 0 ? (cone.A * x + cone.b).norm() : 0.0;
    v = std::max(v, lhs - rhs);
  }
  if (prog.lower.size() == x.size()) {
    for (int i = 0; i < x.size(); ++i) {
      if (std::isfinite(prog.lower(i))) v = std::max(v, prog.lower(i) - x(i));
      if (std::isfinite(prog.upper(i))) v = std::max(v, x(i) - prog.upper(i));
    }
  }
  return v;
}

SocConstraint quadratic_to_soc(const ConvexQuadratic& q, int num_vars) {
  if (q.curvature < 0.0) {
    throw std::invalid_argument("quadratic_to_soc: curvature must be nonnegative");
  }
  if (q.center.size() != static_cast<Eigen::Index>(q.idx.size()) ||
      q.lin.size() != num_vars) {
    throw std::invalid_argument("quadratic_to_soc: dimension mismatch");
  }
  SocConstraint cone;
  if (q.curvature == 0.0) {  // affine pass-through: lin.x + offset >= 0
    cone.A = Eigen::MatrixXd(0, num_vars);
    cone.b = Eigen::VectorXd(0);
    cone.c = q.lin;
    cone.d = q.offset;
    return cone;
  }
  // (kappa/2)||u||^2 <= t  <=>  ||(sqrt(kappa/2) u, (t-1)/2)|| <= (t+1)/2
  const double scale = std::sqrt(q.curvature / 2.0);
  const int rows = static_cast<int>(q.idx.size()) + 1;
  cone.A = Eigen::MatrixXd::Zero(rows, num_vars);
  cone.b = Eigen::VectorXd::Zero(rows);
  for (std::size_t r = 0; r < q.idx.size(); ++r) {
    cone.A(static_cast<int>(r), q.idx[r]) = scale;
    cone.b(static_cast<int>(r)) = -scale * q.center(static_cast<int>(r));
  }
  cone.A.row(rows - 1) = 0.5 * q.lin.transpose();
  cone.b(rows - 1) = 0.5 * (q.offset - 1.0);
  cone.c = 0.5 * q.lin;
  cone.d = 0.5 * (q.offset + 1.0);
  return cone;
}

ConicSolution solve(const ConicProgram& prog, const SolveOptions& opts) {
  ConicSolution out;
  const int n = prog.num_vars();
  if (n == 0 || (prog.cones.empty() && prog.lower.size() == 0)) {
    throw std::invalid_argument("conic program needs variables and at least one constraint");
  }
  if (!all_finite(prog)) {
    out.status = Status::NumericalFailure;
    return out;
  }

  ConeLp lp = flatten(prog);
  const int m = static_cast<int>(lp.G.rows());
  const int p = static_cast<int>(lp.A.rows());
  if (m == 0) throw std::invalid_argument("conic program has no inequality rows");

  // Normalize the objective so the iterates (and hence the returned argmin)
  // do not depend on a positive scaling of the cost.
  const double cost_scale = std::max(lp.c.norm(), 1e-100);
  lp.c /= cost_scale;

  const double resx0 = std::max(1.0, lp.c.norm());
  const double resy0 = std::max(1.0, lp.b.size() > 0 ? lp.b.norm() : 0.0);
  const double resz0 = std::max(1.0, lp.h.norm());
  const double viol_scale =
      std::max(1.0, std::max(lp.h.size() ? lp.h.cwiseAbs().maxCoeff() : 0.0,
                             lp.b.size() ? lp.b.cwiseAbs().maxCoeff() : 0.0));

  KktSolver kkt(lp);
  const Eigen::VectorXd e = cone_identity(lp.cones);

  // --- initial point: two solves with identity scaling ---------------------
  Eigen::VectorXd x(n), y(p), s(m), z(m), tmp_y, tmp_z, tmp_x;
  kkt.factor(nullptr);
  kkt.solve(Eigen::VectorXd::Zero(n), lp.b, lp.h, x, tmp_y, tmp_z);
  s = -tmp_z;  // = h - G x
  double shift = max_step(lp.cones, s);
  if (shift >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + shift) * e;
  kkt.solve(-lp.c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m), tmp_x, y, z);
  shift = max_step(lp.cones, z);
  if (shift >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + shift) * e;

  Scaling w;
  Eigen::VectorXd lambda(m);

  double best_merit = kInf;
  Eigen::VectorXd best_x = x;
  double best_gap = kInf;
  int stall = 0;
  Status status = Status::MaxIter;

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const Eigen::VectorXd rx = lp.c + lp.G.transpose() * z +
                               (p > 0 ? Eigen::VectorXd(lp.A.transpose() * y)
                                      : Eigen::VectorXd::Zero(n));
    const Eigen::VectorXd ry = p > 0 ? Eigen::VectorXd(lp.A * x - lp.b) : Eigen::VectorXd(0);
    const Eigen::VectorXd rz = lp.G * x + s - lp.h;
    const double pcost = lp.c.dot(x);
    const double dcost = -(lp.b.size() ? lp.b.dot(y) : 0.0) - lp.h.dot(z);
    const double gap = s.dot(z);
    const double pres = std::max(p > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0);
    const double dres = rx.norm() / resx0;
    const double gap_den = std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
    const double merit = std::max({pres, dres, gap / gap_den});

    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_gap = gap / gap_den;
    }
    out.merit_trace.push_back(best_merit);
    out.iterations = iter;

    if (pres <= opts.feas_tol && dres <= opts.feas_tol &&
        gap <= opts.gap_tol * gap_den) {
      status = Status::Optimal;
      best_x = x;
      best_gap = gap / gap_den;
      break;
    }
    // Primal infeasibility certificate: A'y + G'z ~ 0 with b'y + h'z < 0.
    if (dcost > 0.0) {
      Eigen::VectorXd cert = lp.G.transpose() * z;
      if (p > 0) cert += lp.A.transpose() * y;
      if (cert.norm() / resx0 / dcost <= opts.feas_tol) {
        status = Status::Infeasible;
        break;
      }
    }
    // Dual infeasibility (primal unboundedness) certificate.
    if (pcost < 0.0) {
      const double unb = std::max(p > 0 ? (lp.A * x).norm() / resy0 : 0.0,
                                  (lp.G * x + s).norm() / resz0) /
                         (-pcost);
      if (unb <= opts.feas_tol) {
        status = Status::NumericalFailure;
        break;
      }
    }
    if (iter == opts.max_iter) {
      status = Status::MaxIter;
      break;
    }

    if (!compute_scaling(lp.cones, s, z, w, lambda)) {
      status = Status::NumericalFailure;
      break;
    }
    kkt.factor(&w);

    // Predictor (affine scaling) direction.
    Eigen::VectorXd dx, dy, dz, ds;
    {
      const Eigen::VectorXd bz = -rz + s;  // -rz - W(-lambda) since W lambda = s
      kkt.solve(-rx, -ry, bz, dx, dy, dz);
      ds = apply_w(lp.cones, w, -lambda - apply_w(lp.cones, w, dz));
    }
    double alpha = std::min({1.0, step_to_boundary(lp.cones, s, ds),
                             step_to_boundary(lp.cones, z, dz)});
    const double gap_aff = (s + alpha * ds).dot(z + alpha * dz);
    double sigma = gap > 0.0 ? std::pow(std::clamp(gap_aff / gap, 0.0, 1.0), 3.0) : 0.0;

    // Corrector (combined) direction.
    const double mu = gap / lp.cones.degree();
    const Eigen::VectorXd corr = jordan_prod(
        lp.cones, apply_winv(lp.cones, w, ds), apply_w(lp.cones, w, dz));
    const Eigen::VectorXd comp =
        sigma * mu * e - jordan_prod(lp.cones, lambda, lambda) - corr;
    const Eigen::VectorXd dd = jordan_solve(lp.cones, lambda, comp);
    {
      const Eigen::VectorXd bz = -rz - apply_w(lp.cones, w, dd);
      kkt.solve(-rx, -ry, bz, dx, dy, dz);
      ds = apply_w(lp.cones, w, dd - apply_w(lp.cones, w, dz));
    }
    if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) {
      status = Status::NumericalFailure;
      break;
    }
    alpha = std::min(1.0, kStepScale * std::min(step_to_boundary(lp.cones, s, ds),
                                                step_to_boundary(lp.cones, z, dz)));
    if (alpha < 1e-7) {
      if (++stall >= 3) {
        status = Status::NumericalFailure;
        break;
      }
    } else {
      stall = 0;
    }
    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
  }

  out.x = best_x;
  out.status = status;
  out.objective = cost_scale * lp.c.dot(best_x);
  out.gap = best_gap;
  out.max_residual = max_violation(prog, best_x);
  if (status == Status::Optimal && out.max_residual > opts.feas_tol * viol_scale * 10.0) {
    // The independent evaluator disagrees with the solver's own residuals;
    // never hand such a point downstream as Optimal.
    out.status = Status::NumericalFailure;
  }
  return out;
}

}  // namespace masim::socp
