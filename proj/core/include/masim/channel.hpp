#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace masim {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using CVec = Eigen::VectorXcd;

/// Elevation/azimuth pair of one propagation path, both in [0, pi].
struct PathAngles {
  double elevation = 0.0;
  double azimuth = 0.0;
};

/// Projection of a path direction onto the planar antenna region:
/// [sin(el)*cos(az), cos(el)]. Always inside the unit disk.
Vec2 wave_vector(const PathAngles& a);

/// The multipath description of one transmitter->user link: per-path angles
/// and complex responses (linear amplitude).
class PathSet {
 public:
  PathSet() = default;
  PathSet(std::vector<PathAngles> angles, CVec responses);

  int count() const { return static_cast<int>(angles_.size()); }
  const std::vector<PathAngles>& angles() const { return angles_; }
  const CVec& responses() const { return responses_; }
  /// 2 x L matrix of wave vectors, one column per path.
  const Eigen::Matrix2Xd& wave_vectors() const { return wave_; }

 private:
  std::vector<PathAngles> angles_;
  CVec responses_;
  Eigen::Matrix2Xd wave_;
};

/// Per-path transmit phase profile seen from antenna position t:
/// entry l equals exp(+i * 2*pi/wavelength * t.p_l). Every entry has unit
/// modulus.
CVec field_response_vector(const Vec2& t, const PathSet& paths,
                           double wavelength);

/// Complex channel coefficient between an antenna at t and the link's user:
/// sum over paths of tau_l * exp(-i * 2*pi/wavelength * t.p_l). Equals the
/// inner product field_response_vector(t)^H * responses.
Complex channel_coefficient(const Vec2& t, const PathSet& paths,
                            double wavelength);

/// Antenna coordinates for all transmitters; tx[j] is 2 x N (one column per
/// antenna, metres, local region coordinates).
struct PositionSet {
  std::vector<Eigen::Matrix2Xd> tx;

  int transmitters() const { return static_cast<int>(tx.size()); }
  int antennas() const { return tx.empty() ? 0 : static_cast<int>(tx[0].cols()); }
};

/// All K*K channel vectors induced by the current antenna positions.
/// h[k][j](n) is the coefficient from antenna n of transmitter j to user k.
struct ChannelState {
  std::vector<std::vector<CVec>> h;
  double wavelength = 0.0;

  int users() const { return static_cast<int>(h.size()); }
};

/// Evaluates every channel vector entry-wise from the position set and the
/// per-link path table (paths[k][j]).
ChannelState channel_state(const PositionSet& positions,
                           const std::vector<std::vector<PathSet>>& paths,
                           double wavelength);

}  // namespace masim
