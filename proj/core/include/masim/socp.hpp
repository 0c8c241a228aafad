#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace masim::socp {

enum class Status { Optimal, Infeasible, MaxIter, NumericalFailure };

const char* to_string(Status s);

/// One second-order cone constraint ||A x + b|| <= c.x + d. A may have zero
/// rows, in which case the constraint degenerates to the affine inequality
/// c.x + d >= 0.
struct SocConstraint {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d = 0.0;
};

/// Linear-objective program over affine equalities, second-order cones and
/// optional box bounds:
///
///   minimize    cost.x
///   subject to  eq_lhs x = eq_rhs
///               ||A_m x + b_m|| <= c_m.x + d_m      for every cone m
///               lower <= x <= upper                 (entries may be +-inf)
struct ConicProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq_lhs;  // 0 x n when there are no equalities
  Eigen::VectorXd eq_rhs;
  std::vector<SocConstraint> cones;
  Eigen::VectorXd lower;  // size 0 => no box
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(cost.size()); }
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
};

struct ConicSolution {
  Eigen::VectorXd x;
  Status status = Status::NumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  /// Largest constraint violation of the returned x, measured by the
  /// standalone residual evaluator (max_violation), not by solver internals.
  double max_residual = std::numeric_limits<double>::quiet_NaN();
  /// Final relative duality gap estimate.
  double gap = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  /// Residual merit of the retained (best-so-far) iterate after each
  /// interior-point iteration.
  std::vector<double> merit_trace;
};

/// Primal-dual interior-point solve (Nesterov-Todd scaling, Mehrotra
/// predictor-corrector, dense KKT). Feasibility tolerances are relative to
/// max(1, largest |rhs| entry). NaN/Inf anywhere in the problem data yields
/// Status::NumericalFailure.
ConicSolution solve(const ConicProgram& prog, const SolveOptions& opts = {});

/// Largest violation of the program's equalities, cones and bounds at x.
/// Deliberately independent of the solver so callers can re-verify returned
/// points.
double max_violation(const ConicProgram& prog, const Eigen::VectorXd& x);

/// Convex quadratic constraint with identity curvature:
///   (curvature/2) * || x[idx] - center ||^2 <= lin.x + offset
struct ConvexQuadratic {
  double curvature = 0.0;
  std::vector<int> idx;
  Eigen::VectorXd center;
  Eigen::VectorXd lin;
  double offset = 0.0;
};

/// Exact epigraph reformulation of a ConvexQuadratic as one cone constraint
/// (affine pass-through when curvature == 0). Negative curvature is rejected.
SocConstraint quadratic_to_soc(const ConvexQuadratic& q, int num_vars);

}  // namespace masim::socp
