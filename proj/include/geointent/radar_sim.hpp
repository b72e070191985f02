#pragma once

#include "geointent/env_model.hpp"
#include "geointent/kinematics.hpp"
#include "geointent/rng.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <vector>

namespace geointent {

/// Staring radar. Angular resolutions are given as cross-range lengths at
/// the reference range, so sigma_angle = cross_range_sigma_at_ref / reference_range.
struct RadarConfig {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double azimuth_span_deg = 90.0;
  double elevation_span_deg = 90.0;
  double boresight_azimuth_deg = 0.0;
  double boresight_elevation_deg = 0.0;
  double max_range = 2500.0;
  double range_sigma = 1.0;
  double cross_range_sigma_at_ref = 1.0;
  double reference_range = 2500.0;
  double detection_probability = 0.95;
  double false_alarm_rate = 1e-6;
  double cells_per_look = 1e6;
  // Carried as metadata only.
  double center_frequency = 24.55e9;
  double bandwidth = 45e6;
  double reference_rcs_dbsm = 0.0;

  double angle_sigma() const { return cross_range_sigma_at_ref / reference_range; }
  void validate() const;

  /// Radar at the geofence corner farthest from the environment centre,
  /// 5 m above ground, looking at the environment centre.
  static RadarConfig for_environment(const Environment& env);
};

struct RadarDetection {
  double t = 0.0;
  double range = 0.0;
  double azimuth = 0.0;    // rad, world frame
  double elevation = 0.0;  // rad
  bool is_false_alarm = false;
};

/// Detections sharing one look time.
struct RadarLook {
  double t = 0.0;
  std::vector<RadarDetection> detections;
};

struct SphericalPoint {
  double range, azimuth, elevation;
};

SphericalPoint to_spherical(const RadarConfig& cfg, const Eigen::Vector3d& world);
bool in_field_of_view(const RadarConfig& cfg, const SphericalPoint& sp);

/// The Bernoulli detection draw precedes the noise draws, so the outcome
/// does not depend on the noise scale.
std::optional<RadarDetection> detect(const RadarConfig& cfg, double t,
                                     const Eigen::Vector3d& true_position, Rng& rng);

std::vector<RadarDetection> false_alarms(const RadarConfig& cfg, double t, Rng& rng);

struct CartesianMeasurement {
  double t = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
};

/// Spherical-to-Cartesian conversion with first-order covariance propagation.
CartesianMeasurement to_cartesian(const RadarDetection& det, const RadarConfig& cfg);

/// One look per trajectory sample: target detection plus false alarms.
std::vector<RadarLook> simulate_looks(const RadarConfig& cfg, const Trajectory& traj, Rng& rng);

void write_detections_csv(std::ostream& os, const std::vector<RadarLook>& looks);
/// Rows are grouped into looks by timestamp; look times without rows are lost,
/// which the tracker treats as missed detections.
std::vector<RadarLook> read_detections_csv(std::istream& is);

void to_json(nlohmann::json& j, const RadarConfig& c);
void from_json(const nlohmann::json& j, RadarConfig& c);

}  // namespace geointent
