#include "geointent/env_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geointent {

Region::Region(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw std::invalid_argument("region corners have different dimensionality");
  }
  if (lo_.size() != 2 && lo_.size() != 3) {
    throw std::invalid_argument("region must be 2D or 3D");
  }
  if (!(lo_.array() < hi_.array()).all()) {
    throw std::invalid_argument("region min corner must be strictly below max corner");
  }
}

Region Region::box2(double x0, double x1, double y0, double y1) {
  return Region(Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y1));
}

Region Region::box3(double x0, double x1, double y0, double y1, double z0, double z1) {
  return Region(Eigen::Vector3d(x0, y0, z0), Eigen::Vector3d(x1, y1, z1));
}

bool Region::overlaps(const Region& other) const {
  if (other.dim() != dim()) {
    throw std::invalid_argument("region dimensionality mismatch");
  }
  return ((lo_.array() < other.hi_.array()) && (other.lo_.array() < hi_.array())).all();
}

bool Region::encloses(const Region& other) const {
  if (other.dim() != dim()) {
    throw std::invalid_argument("region dimensionality mismatch");
  }
  return ((lo_.array() <= other.lo_.array()) && (other.hi_.array() <= hi_.array())).all();
}

Region Region::scaled(double factor) const {
  if (!(factor > 0.0)) {
    throw std::invalid_argument("scale factor must be positive");
  }
  return Region(lo_ * factor, hi_ * factor);
}

bool contains(const Region& region, const Eigen::Ref<const Eigen::VectorXd>& point) {
  if (point.size() != region.dim()) {
    throw std::invalid_argument("point dimensionality " + std::to_string(point.size()) +
                                " does not match region dimensionality " +
                                std::to_string(region.dim()));
  }
  return ((region.lo().array() <= point.array()) && (point.array() <= region.hi().array())).all();
}

bool segment_intersects(const Region& box, const Eigen::Ref<const Eigen::VectorXd>& p1,
                        const Eigen::Ref<const Eigen::VectorXd>& p2) {
  if (p1.size() != box.dim() || p2.size() != box.dim()) {
    throw std::invalid_argument("segment dimensionality does not match box");
  }
  // Parametric segment p1 + t (p2 - p1), t in [0,1], clipped slab by slab.
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int i = 0; i < box.dim(); ++i) {
    const double d = p2[i] - p1[i];
    const double lo = box.lo()[i];
    const double hi = box.hi()[i];
    if (d == 0.0) {
      if (p1[i] < lo || p1[i] > hi) return false;
      continue;
    }
    double t0 = (lo - p1[i]) / d;
    double t1 = (hi - p1[i]) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  return true;
}

Environment Environment::example_2d() {
  Environment env;
  env.id = "example1-2d";
  env.dim = 2;
  env.bounds = Region::box2(0, 105, 0, 105);
  env.geofence = Region::box2(75, 100, 75, 100);
  env.obstacles = {
      Region::box2(20, 30, 20, 30),
      Region::box2(0, 105, 100, 105),
      Region::box2(100, 105, 0, 105),
  };
  return env;
}

Environment Environment::default_3d() {
  Environment env;
  env.id = "example1-3d";
  env.dim = 3;
  env.bounds = Region::box3(0, 105, 0, 105, 0, 40);
  env.geofence = Region::box3(75, 100, 75, 100, 0, 30);
  env.obstacles = {
      Region::box3(20, 30, 20, 30, 0, 40),
      Region::box3(0, 105, 100, 105, 0, 40),
      Region::box3(100, 105, 0, 105, 0, 40),
  };
  return env;
}

std::vector<std::string> Environment::violations() const {
  std::vector<std::string> out;
  if (dim != 2 && dim != 3) {
    out.push_back("dimensionality must be 2 or 3");
    return out;
  }
  auto check_dim = [&](const Region& r, const std::string& name) {
    if (r.dim() != dim) {
      out.push_back(name + " has dimensionality " + std::to_string(r.dim()));
      return false;
    }
    return true;
  };
  if (!check_dim(bounds, "bounds")) return out;
  if (check_dim(geofence, "geofence") && !bounds.encloses(geofence)) {
    out.push_back("geofence is not inside bounds");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string name = "obstacle " + std::to_string(i);
    if (!check_dim(obstacles[i], name)) continue;
    if (!bounds.encloses(obstacles[i])) out.push_back(name + " is not inside bounds");
    if (geofence.dim() == dim && geofence.overlaps(obstacles[i])) {
      out.push_back(name + " overlaps the geofence");
    }
  }
  return out;
}

void Environment::validate() const {
  const auto v = violations();
  if (!v.empty()) throw std::invalid_argument("invalid environment: " + v.front());
}

Environment Environment::scaled(double factor) const {
  Environment env = *this;
  env.bounds = bounds.scaled(factor);
  env.geofence = geofence.scaled(factor);
  for (auto& o : env.obstacles) o = o.scaled(factor);
  return env;
}

bool Environment::in_obstacle(const Eigen::Ref<const Eigen::VectorXd>& p) const {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const Region& o) { return contains(o, p); });
}

bool segment_collides(const Eigen::Ref<const Eigen::VectorXd>& p1,
                      const Eigen::Ref<const Eigen::VectorXd>& p2, const Environment& env) {
  return std::any_of(env.obstacles.begin(), env.obstacles.end(),
                     [&](const Region& o) { return segment_intersects(o, p1, p2); });
}

double intrusion_time(const Trajectory& traj, const Region& geofence) {
  if (traj.empty()) throw std::invalid_argument("intrusion_time: empty trajectory");
  for (const auto& st : traj.states) {
    if (contains(geofence, st.position().head(geofence.dim()))) return st.t;
  }
  return kNeverIntrudes;
}

void to_json(nlohmann::json& j, const Region& r) {
  j = nlohmann::json{{"min", std::vector<double>(r.lo().begin(), r.lo().end())},
                     {"max", std::vector<double>(r.hi().begin(), r.hi().end())}};
}

void from_json(const nlohmann::json& j, Region& r) {
  const auto lo = j.at("min").get<std::vector<double>>();
  const auto hi = j.at("max").get<std::vector<double>>();
  r = Region(Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
             Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

void to_json(nlohmann::json& j, const Environment& e) {
  j = nlohmann::json{{"id", e.id},
                     {"dimensionality", e.dim},
                     {"bounds", e.bounds},
                     {"geofence", e.geofence},
                     {"obstacles", e.obstacles}};
}

void from_json(const nlohmann::json& j, Environment& e) {
  e.id = j.value("id", std::string("custom"));
  e.dim = j.at("dimensionality").get<int>();
  e.bounds = j.at("bounds").get<Region>();
  e.geofence = j.at("geofence").get<Region>();
  e.obstacles = j.value("obstacles", std::vector<Region>{});
  if (j.contains("scale")) e = e.scaled(j.at("scale").get<double>());
  e.validate();
}

}  // namespace geointent
