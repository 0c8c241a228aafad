#include "masim/channel.hpp"

#include <numbers>
#include <stdexcept>

namespace masim {

namespace {
constexpr double kPi = std::numbers::pi;
}

Vec2 wave_vector(const PathAngles& a) {
  if (!(a.elevation >= 0.0 && a.elevation <= kPi) ||
      !(a.azimuth >= 0.0 && a.azimuth <= kPi)) {
    throw std::invalid_argument("path angles must lie in [0, pi]");
  }
  return {std::sin(a.elevation) * std::cos(a.azimuth), std::cos(a.elevation)};
}

PathSet::PathSet(std::vector<PathAngles> angles, CVec responses)
    : angles_(std::move(angles)), responses_(std::move(responses)) {
  if (angles_.empty() || responses_.size() != static_cast<Eigen::Index>(angles_.size())) {
    throw std::invalid_argument("path set needs matching angle/response counts, at least one path");
  }
  wave_.resize(2, static_cast<Eigen::Index>(angles_.size()));
  for (std::size_t l = 0; l < angles_.size(); ++l) {
    wave_.col(static_cast<Eigen::Index>(l)) = wave_vector(angles_[l]);
  }
}

CVec field_response_vector(const Vec2& t, const PathSet& paths,
                           double wavelength) {
  if (!(wavelength > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  const double k0 = 2.0 * kPi / wavelength;
  CVec g(paths.count());
  for (int l = 0; l < paths.count(); ++l) {
    const double phase = k0 * t.dot(paths.wave_vectors().col(l));
    g(l) = Complex(std::cos(phase), std::sin(phase));
  }
  return g;
}

Complex channel_coefficient(const Vec2& t, const PathSet& paths,
                            double wavelength) {
  if (!(wavelength > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  const double k0 = 2.0 * kPi / wavelength;
  Complex acc(0.0, 0.0);
  for (int l = 0; l < paths.count(); ++l) {
    const double phase = -k0 * t.dot(paths.wave_vectors().col(l));
    acc += paths.responses()(l) * Complex(std::cos(phase), std::sin(phase));
  }
  return acc;
}

ChannelState channel_state(const PositionSet& positions,
                           const std::vector<std::vector<PathSet>>& paths,
                           double wavelength) {
  const int users = static_cast<int>(paths.size());
  const int txs = positions.transmitters();
  if (users == 0 || static_cast<int>(paths[0].size()) != txs) {
    throw std::invalid_argument("path table and position set dimensions disagree");
  }
  ChannelState state;
  state.wavelength = wavelength;
  state.h.resize(users);
  for (int k = 0; k < users; ++k) {
    state.h[k].resize(txs);
    for (int j = 0; j < txs; ++j) {
      const Eigen::Matrix2Xd& t = positions.tx[j];
      CVec hkj(t.cols());
      for (Eigen::Index n = 0; n < t.cols(); ++n) {
        hkj(n) = channel_coefficient(t.col(n), paths[k][j], wavelength);
      }
      state.h[k][j] = std::move(hkj);
    }
  }
  return state;
}

}  // namespace masim
