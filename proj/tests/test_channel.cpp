#include <doctest.h>

#include <cmath>
#include <numbers>

#include "masim/channel.hpp"
#include "masim/rng.hpp"
#include "masim/scenario.hpp"

using namespace masim;

namespace {

constexpr double kPi = std::numbers::pi;

PathSet random_path_set(int paths, Rng& rng, double scale = 1.0) {
  std::vector<PathAngles> angles;
  for (int l = 0; l < paths; ++l) {
    angles.push_back(sample_angle_pair(rng.uniform(), rng.uniform()));
  }
  CVec tau(paths);
  for (int l = 0; l < paths; ++l) {
    auto [re, im] = rng.normal_pair();
    tau(l) = scale * Complex(re, im);
  }
  return PathSet(std::move(angles), std::move(tau));
}

Vec2 random_point(Rng& rng, double span) {
  return {span * rng.uniform(), span * rng.uniform()};
}

}  // namespace

TEST_CASE("wave_vector endpoint values") {
  const Vec2 broadside = wave_vector({kPi / 2.0, 0.0});
  CHECK(broadside.x() == doctest::Approx(1.0));
  CHECK(broadside.y() == doctest::Approx(0.0));

  const Vec2 zenith = wave_vector({0.0, 2.0});
  CHECK(zenith.x() == doctest::Approx(0.0));
  CHECK(zenith.y() == doctest::Approx(1.0));

  const Vec2 side = wave_vector({kPi / 2.0, kPi / 2.0});
  CHECK(std::abs(side.x()) < 1e-15);
  CHECK(std::abs(side.y()) < 1e-15);

  CHECK_THROWS_AS(wave_vector({-0.1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(wave_vector({0.0, 3.5}), std::invalid_argument);
}

TEST_CASE("wave vectors stay inside the unit disk") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p = wave_vector(sample_angle_pair(rng.uniform(), rng.uniform()));
    CHECK(p.norm() <= 1.0 + 1e-15);
  }
}

TEST_CASE("field response vector basics") {
  const double lambda = 0.1;
  Rng rng(11);
  const PathSet paths = random_path_set(4, rng);

  const CVec at_origin = field_response_vector(Vec2::Zero(), paths, lambda);
  for (int l = 0; l < 4; ++l) {
    CHECK(std::abs(at_origin(l) - Complex(1.0, 0.0)) < 1e-15);
  }

  // One path at broadside: moving half a wavelength flips the phase.
  PathSet single({{kPi / 2.0, 0.0}}, CVec::Ones(1));
  const CVec flipped = field_response_vector({lambda / 2.0, 0.3}, single, lambda);
  CHECK(std::abs(flipped(0) - Complex(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("field response entries recompute path by path") {
  const double lambda = 0.1;
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const PathSet paths = random_path_set(3, rng);
    const Vec2 t = random_point(rng, 0.5);
    const CVec g = field_response_vector(t, paths, lambda);
    for (int l = 0; l < 3; ++l) {
      const double phase = 2.0 * kPi / lambda * t.dot(wave_vector(paths.angles()[l]));
      CHECK(std::abs(g(l) - std::polar(1.0, phase)) < 1e-12);
      CHECK(std::abs(std::abs(g(l)) - 1.0) < 1e-12);  // unit modulus
    }
  }
}

TEST_CASE("channel coefficient closed cases") {
  const double lambda = 0.1;
  PathSet unit({{0.3, 0.4}}, CVec::Ones(1));
  CHECK(std::abs(channel_coefficient(Vec2::Zero(), unit, lambda) - Complex(1.0, 0.0)) < 1e-15);

  // Two equal paths with phases 0 and pi cancel exactly.
  PathSet pair({{kPi / 2.0, 0.0}, {0.0, 0.0}}, CVec::Ones(2));
  // p1 = [1,0], p2 = [0,1]; t = [0, lambda/2] gives t.p1 = 0, t.p2 = lambda/2.
  const Complex cancelled = channel_coefficient({0.0, lambda / 2.0}, pair, lambda);
  CHECK(std::abs(cancelled) < 1e-12);
}

TEST_CASE("channel coefficient equals the matrix form and the FRV inner product") {
  const double lambda = 0.1;
  Rng rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const int paths = 1 + static_cast<int>(rng.uniform() * 6.0);
    const PathSet link = random_path_set(paths, rng);
    const Vec2 t = random_point(rng, 0.4);

    const Complex direct = channel_coefficient(t, link, lambda);

    // Matrix form: G^H Sigma 1 with G the stacked field-response vectors.
    const CVec frv = field_response_vector(t, link, lambda);
    const Complex via_matrix = (frv.adjoint() * link.responses().asDiagonal() *
                                CVec::Ones(paths))(0);
    CHECK(std::abs(direct - via_matrix) < 1e-12 * (1.0 + std::abs(direct)));

    // Inner product form: FRV^H responses.
    const Complex via_inner = frv.dot(link.responses());
    CHECK(std::abs(direct - via_inner) < 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("global phase on responses leaves channel magnitudes unchanged") {
  const double lambda = 0.1;
  Rng rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    const PathSet link = random_path_set(5, rng);
    const double psi = 2.0 * kPi * rng.uniform();
    const PathSet rotated(link.angles(),
                          CVec(std::polar(1.0, psi) * link.responses()));
    const Vec2 t = random_point(rng, 0.4);
    const double before = std::abs(channel_coefficient(t, link, lambda));
    const double after = std::abs(channel_coefficient(t, rotated, lambda));
    CHECK(std::abs(before - after) < 1e-12 * (1.0 + before));
  }
}

TEST_CASE("channel coefficient is Lipschitz in the position") {
  const double lambda = 0.1;
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const PathSet link = random_path_set(4, rng);
    const double bound = 2.0 * kPi / lambda * link.responses().cwiseAbs().sum();
    const Vec2 t = random_point(rng, 0.4);
    const Vec2 dt = 1e-3 * Vec2(rng.uniform() - 0.5, rng.uniform() - 0.5);
    const double diff =
        std::abs(channel_coefficient(t + dt, link, lambda) -
                 channel_coefficient(t, link, lambda));
    CHECK(diff <= bound * dt.norm() * (1.0 + 1e-9));
  }
}

TEST_CASE("channel_state matches entry-wise recomputation") {
  const double lambda = 0.1;
  Rng rng(29);
  const int users = 2;
  const int antennas = 3;

  std::vector<std::vector<PathSet>> paths(users);
  for (int k = 0; k < users; ++k) {
    for (int j = 0; j < users; ++j) paths[k].push_back(random_path_set(4, rng));
  }
  PositionSet positions;
  for (int j = 0; j < users; ++j) {
    Eigen::Matrix2Xd tx(2, antennas);
    for (int n = 0; n < antennas; ++n) tx.col(n) = random_point(rng, 0.4);
    positions.tx.push_back(tx);
  }

  const ChannelState state = channel_state(positions, paths, lambda);
  for (int k = 0; k < users; ++k) {
    for (int j = 0; j < users; ++j) {
      for (int n = 0; n < antennas; ++n) {
        const Complex expect =
            channel_coefficient(positions.tx[j].col(n), paths[k][j], lambda);
        CHECK(std::abs(state.h[k][j](n) - expect) == 0.0);  // same code path, bit-equal
      }
    }
  }

  SUBCASE("single antenna reduces to the scalar coefficient") {
    PositionSet one;
    one.tx = {Eigen::Matrix2Xd::Zero(2, 1), Eigen::Matrix2Xd::Zero(2, 1)};
    one.tx[0].col(0) = Vec2(0.1, 0.2);
    one.tx[1].col(0) = Vec2(0.3, 0.1);
    const ChannelState s = channel_state(one, paths, lambda);
    CHECK(std::abs(s.h[0][0](0) -
                   channel_coefficient(one.tx[0].col(0), paths[0][0], lambda)) == 0.0);
  }

  SUBCASE("coincident antennas get identical entries") {
    PositionSet same;
    Eigen::Matrix2Xd tx(2, antennas);
    tx.colwise() = Vec2(0.17, 0.05);
    same.tx = {tx, tx};
    const ChannelState s = channel_state(same, paths, lambda);
    for (int n = 1; n < antennas; ++n) {
      CHECK(std::abs(s.h[0][0](n) - s.h[0][0](0)) == 0.0);
    }
  }

  SUBCASE("dimension mismatch is rejected") {
    PositionSet bad;
    bad.tx = {Eigen::Matrix2Xd::Zero(2, 1)};
    CHECK_THROWS_AS(channel_state(bad, paths, lambda), std::invalid_argument);
  }
}
