#include <doctest.h>

#include <cmath>

#include "masim/rng.hpp"
#include "masim/socp.hpp"

using namespace masim;
using namespace masim::socp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SocConstraint affine_ge(const Eigen::VectorXd& c, double d) {
  SocConstraint cone;
  cone.A = Eigen::MatrixXd(0, c.size());
  cone.b = Eigen::VectorXd(0);
  cone.c = c;
  cone.d = d;
  return cone;
}

ConicProgram norm_over_box() {
  // minimize u  s.t.  ||(x1, x2)|| <= u, 1 <= x <= 2.
  ConicProgram prog;
  prog.cost = Eigen::Vector3d(0, 0, 1);
  SocConstraint cone;
  cone.A = Eigen::MatrixXd::Zero(2, 3);
  cone.A(0, 0) = cone.A(1, 1) = 1.0;
  cone.b = Eigen::Vector2d::Zero();
  cone.c = Eigen::Vector3d(0, 0, 1);
  prog.cones.push_back(cone);
  prog.lower = Eigen::Vector3d(1, 1, -kInf);
  prog.upper = Eigen::Vector3d(2, 2, kInf);
  return prog;
}

// A random strictly feasible instance on the box [-0.5, 0.5]^dim.
ConicProgram random_program(int dim, Rng& rng) {
  ConicProgram prog;
  prog.cost = Eigen::VectorXd(dim);
  for (int i = 0; i < dim; ++i) prog.cost(i) = rng.normal_pair().first;
  prog.cost.normalize();
  prog.lower = Eigen::VectorXd::Constant(dim, -0.5);
  prog.upper = Eigen::VectorXd::Constant(dim, 0.5);

  Eigen::VectorXd interior(dim);
  for (int i = 0; i < dim; ++i) interior(i) = 0.3 * (rng.uniform() - 0.5);

  const int cones = 1 + static_cast<int>(rng.uniform() * 2.0);
  for (int m = 0; m < cones; ++m) {
    const int rows = 1 + static_cast<int>(rng.uniform() * 3.0);
    SocConstraint cone;
    cone.A = Eigen::MatrixXd(rows, dim);
    cone.b = Eigen::VectorXd(rows);
    cone.c = Eigen::VectorXd(dim);
    for (int r = 0; r < rows; ++r) {
      cone.b(r) = 0.3 * (rng.uniform() - 0.5);
      for (int i = 0; i < dim; ++i) cone.A(r, i) = rng.normal_pair().first;
    }
    for (int i = 0; i < dim; ++i) cone.c(i) = rng.normal_pair().first;
    // Choose d so the interior point has a healthy margin.
    cone.d = (cone.A * interior + cone.b).norm() - cone.c.dot(interior) + 0.2 + 0.3 * rng.uniform();
    prog.cones.push_back(std::move(cone));
  }
  return prog;
}

bool feasible_at(const ConicProgram& prog, const Eigen::VectorXd& x) {
  return max_violation(prog, x) <= 0.0;
}

}  // namespace

TEST_CASE("one-variable bound: minimize x subject to x >= 3") {
  ConicProgram prog;
  prog.cost = Eigen::VectorXd::Ones(1);
  prog.cones.push_back(affine_ge(Eigen::VectorXd::Ones(1), -3.0));
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.x(0) == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(sol.max_residual <= 1e-7);
}

TEST_CASE("norm objective over a box lands on the corner") {
  const ConicSolution sol = solve(norm_over_box());
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(std::numbers::sqrt2).epsilon(1e-7));
}

TEST_CASE("equality constraints participate") {
  // minimize x + y  s.t.  x - y = 0.5, ||(x, y)|| <= 1.5, 0 <= x, y <= 2.
  ConicProgram prog;
  prog.cost = Eigen::Vector2d(1, 1);
  prog.eq_lhs = Eigen::MatrixXd(1, 2);
  prog.eq_lhs << 1, -1;
  prog.eq_rhs = Eigen::VectorXd::Constant(1, 0.5);
  SocConstraint cone;
  cone.A = Eigen::MatrixXd::Identity(2, 2);
  cone.b = Eigen::Vector2d::Zero();
  cone.c = Eigen::Vector2d::Zero();
  cone.d = 1.5;
  prog.cones.push_back(cone);
  prog.lower = Eigen::Vector2d(0, 0);
  prog.upper = Eigen::Vector2d(2, 2);
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.x(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.x(1) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("random programs match a dense grid search") {
  Rng rng(2024);
  for (int inst = 0; inst < 8; ++inst) {
    const ConicProgram prog = random_program(2, rng);
    const ConicSolution sol = solve(prog);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(max_violation(prog, sol.x) <= 1e-7);

    const double h = 1.5e-4;
    double best = kInf;
    Eigen::VectorXd x(2);
    for (x(0) = -0.5; x(0) <= 0.5; x(0) += h) {
      for (x(1) = -0.5; x(1) <= 0.5; x(1) += h) {
        if (prog.cost.dot(x) < best && feasible_at(prog, x)) best = prog.cost.dot(x);
      }
    }
    // The grid point is feasible, so the solver may not be worse; and the
    // grid must come within the example tolerance of the solver value.
    CHECK(sol.objective <= best + 1e-6);
    CHECK(best - sol.objective <= 1e-3);
  }
}

TEST_CASE("argmin is invariant to positive objective scaling") {
  Rng rng(99);
  for (int inst = 0; inst < 5; ++inst) {
    ConicProgram prog = random_program(3, rng);
    const ConicSolution base = solve(prog);
    prog.cost *= 1000.0;
    const ConicSolution scaled = solve(prog);
    REQUIRE(base.status == Status::Optimal);
    REQUIRE(scaled.status == Status::Optimal);
    CHECK((base.x - scaled.x).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("conflicting bounds are reported infeasible") {
  ConicProgram prog;
  prog.cost = Eigen::VectorXd::Ones(1);
  prog.cones.push_back(affine_ge(Eigen::VectorXd::Ones(1), -3.0));   // x >= 3
  prog.cones.push_back(affine_ge(-Eigen::VectorXd::Ones(1), 2.0));   // x <= 2
  const ConicSolution sol = solve(prog);
  CHECK(sol.status == Status::Infeasible);
}

TEST_CASE("non-finite data is a numerical failure, not a crash") {
  ConicProgram prog;
  prog.cost = Eigen::VectorXd::Constant(1, std::nan(""));
  prog.cones.push_back(affine_ge(Eigen::VectorXd::Ones(1), -3.0));
  CHECK(solve(prog).status == Status::NumericalFailure);
}

TEST_CASE("retained merit trace is non-increasing after iteration 10") {
  Rng rng(5);
  const ConicProgram prog = random_program(3, rng);
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == Status::Optimal);
  for (std::size_t i = 11; i < sol.merit_trace.size(); ++i) {
    CHECK(sol.merit_trace[i] <= sol.merit_trace[i - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("quadratic_to_soc: affine pass-through at zero curvature") {
  ConvexQuadratic q;
  q.curvature = 0.0;
  q.idx = {0, 1};
  q.center = Eigen::Vector2d(0.1, 0.2);
  q.lin = Eigen::Vector3d(1, 2, 3);
  q.offset = 4.0;
  const SocConstraint cone = quadratic_to_soc(q, 3);
  CHECK(cone.A.rows() == 0);
  CHECK(cone.c == q.lin);
  CHECK(cone.d == q.offset);
}

TEST_CASE("quadratic_to_soc: textbook epigraph identity") {
  // ||t||^2 <= s over variables (t1, t2, s) maps to
  // ||(t, (s-1)/2)|| <= (s+1)/2.
  ConvexQuadratic q;
  q.curvature = 2.0;
  q.idx = {0, 1};
  q.center = Eigen::Vector2d::Zero();
  q.lin = Eigen::Vector3d(0, 0, 1);
  q.offset = 0.0;
  const SocConstraint cone = quadratic_to_soc(q, 3);
  REQUIRE(cone.A.rows() == 3);
  Eigen::MatrixXd want(3, 3);
  want << 1, 0, 0, 0, 1, 0, 0, 0, 0.5;
  CHECK((cone.A - want).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cone.b(0) == 0.0);
  CHECK(cone.b(2) == doctest::Approx(-0.5));
  CHECK(cone.c(2) == doctest::Approx(0.5));
  CHECK(cone.d == doctest::Approx(0.5));
}

TEST_CASE("quadratic_to_soc: membership agrees with direct evaluation") {
  Rng rng(17);
  for (int inst = 0; inst < 20; ++inst) {
    const int dim = 4;
    ConvexQuadratic q;
    q.curvature = 0.1 + 3.0 * rng.uniform();
    q.idx = {0, 2};
    q.center = Eigen::Vector2d(rng.uniform(), rng.uniform());
    q.lin = Eigen::VectorXd(dim);
    for (int i = 0; i < dim; ++i) q.lin(i) = rng.normal_pair().first;
    q.offset = 2.0 * rng.uniform();
    const SocConstraint cone = quadratic_to_soc(q, dim);

    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd x(dim);
      for (int i = 0; i < dim; ++i) x(i) = 3.0 * (rng.uniform() - 0.5);
      const Eigen::Vector2d u(x(0) - q.center(0), x(2) - q.center(1));
      const double direct = q.lin.dot(x) + q.offset - 0.5 * q.curvature * u.squaredNorm();
      const double conic = cone.c.dot(x) + cone.d - (cone.A * x + cone.b).norm();
      if (std::abs(direct) < 1e-9) continue;  // skip boundary points
      CHECK((direct >= 0.0) == (conic >= -1e-12));
    }
  }

  ConvexQuadratic bad;
  bad.curvature = -1.0;
  bad.idx = {0};
  bad.center = Eigen::VectorXd::Zero(1);
  bad.lin = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(quadratic_to_soc(bad, 2), std::invalid_argument);
}
