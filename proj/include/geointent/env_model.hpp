#pragma once

#include "geointent/kinematics.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace geointent {

using Position = Eigen::VectorXd;

/// Closed axis-aligned box in 2 or 3 dimensions (meters).
class Region {
 public:
  Region() = default;
  /// Throws std::invalid_argument unless lo < hi componentwise and dims agree.
  Region(Eigen::VectorXd lo, Eigen::VectorXd hi);

  static Region box2(double x0, double x1, double y0, double y1);
  static Region box3(double x0, double x1, double y0, double y1, double z0, double z1);

  int dim() const { return static_cast<int>(lo_.size()); }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  Position centroid() const { return 0.5 * (lo_ + hi_); }
  double volume() const { return (hi_ - lo_).prod(); }

  /// True when the boxes share positive volume. Touching faces do not count.
  bool overlaps(const Region& other) const;
  /// True when `other` lies entirely inside this box (closed).
  bool encloses(const Region& other) const;
  Region scaled(double factor) const;

  friend bool operator==(const Region& a, const Region& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

/// Inclusive membership test. Throws std::invalid_argument on dimension mismatch.
bool contains(const Region& region, const Eigen::Ref<const Eigen::VectorXd>& point);

/// Exact slab test for the closed segment p1-p2 against a closed box.
bool segment_intersects(const Region& box, const Eigen::Ref<const Eigen::VectorXd>& p1,
                        const Eigen::Ref<const Eigen::VectorXd>& p2);

struct Environment {
  std::string id = "example1-2d";
  int dim = 2;
  Region bounds;
  Region geofence;
  std::vector<Region> obstacles;

  /// Bounded 2D environment: bounds [0,105]^2, geofence [75,100]^2,
  /// obstacle [20,30]^2 plus the two border strips.
  static Environment example_2d();
  /// Extruded 3D variant of example_2d (implementation-chosen heights).
  static Environment default_3d();

  /// Lists every violated invariant; empty when the environment is valid.
  std::vector<std::string> violations() const;
  /// Throws std::invalid_argument carrying the first violation.
  void validate() const;

  Environment scaled(double factor) const;
  bool in_obstacle(const Eigen::Ref<const Eigen::VectorXd>& p) const;
};

bool segment_collides(const Eigen::Ref<const Eigen::VectorXd>& p1,
                      const Eigen::Ref<const Eigen::VectorXd>& p2, const Environment& env);

/// Timestamp of the first sample inside the geofence, kNeverIntrudes otherwise.
/// Throws std::invalid_argument for an empty trajectory.
double intrusion_time(const Trajectory& traj, const Region& geofence);

void to_json(nlohmann::json& j, const Region& r);
void from_json(const nlohmann::json& j, Region& r);
void to_json(nlohmann::json& j, const Environment& e);
void from_json(const nlohmann::json& j, Environment& e);

}  // namespace geointent
