#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace geointent {

using Vector9d = Eigen::Matrix<double, 9, 1>;
using Matrix9d = Eigen::Matrix<double, 9, 9>;

/// Marker for "never intrudes".
inline constexpr double kNeverIntrudes = std::numeric_limits<double>::infinity();

/// Index of each component inside the 9-element kinematic state
/// [x, v_x, a_x, y, v_y, a_y, z, v_z, a_z].
enum StateIndex : int {
  kX = 0, kVx = 1, kAx = 2,
  kY = 3, kVy = 4, kAy = 5,
  kZ = 6, kVz = 7, kAz = 8,
};

/// Kinematic state at one instant. In 2D the z-triple is identically zero.
struct FlightState {
  double t = 0.0;
  Vector9d s = Vector9d::Zero();

  Eigen::Vector3d position() const { return {s[kX], s[kY], s[kZ]}; }
  Eigen::Vector3d velocity() const { return {s[kVx], s[kVy], s[kVz]}; }
  Eigen::Vector3d acceleration() const { return {s[kAx], s[kAy], s[kAz]}; }
};

/// A uniformly sampled, labeled flight.
struct Trajectory {
  std::string id;
  std::string intent;
  std::string environment_id;
  int dim = 2;
  double dt = 0.1;
  std::vector<FlightState> states;
  std::vector<double> turn_rates;
  double intrusion_time = kNeverIntrudes;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  double duration() const { return states.empty() ? 0.0 : states.back().t - states.front().t; }
  bool intrudes() const { return intrusion_time != kNeverIntrudes; }

  /// Position of sample k truncated to the trajectory dimensionality.
  Eigen::VectorXd position(std::size_t k) const {
    return states[k].position().head(dim);
  }
};

}  // namespace geointent
