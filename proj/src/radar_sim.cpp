#include "geointent/radar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace geointent {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace

void RadarConfig::validate() const {
  if (!(azimuth_span_deg > 0.0 && azimuth_span_deg <= 360.0) ||
      !(elevation_span_deg > 0.0 && elevation_span_deg <= 360.0)) {
    throw std::invalid_argument("radar: field-of-view spans must be in (0,360]");
  }
  if (!(range_sigma >= 0.0 && cross_range_sigma_at_ref >= 0.0 && reference_range > 0.0)) {
    throw std::invalid_argument("radar: noise parameters out of range");
  }
  if (!(max_range > 0.0)) throw std::invalid_argument("radar: max_range must be > 0");
  if (!(detection_probability > 0.0 && detection_probability <= 1.0)) {
    throw std::invalid_argument("radar: detection_probability must be in (0,1]");
  }
  if (!(false_alarm_rate >= 0.0 && false_alarm_rate < 1.0)) {
    throw std::invalid_argument("radar: false_alarm_rate must be in [0,1)");
  }
  if (!(cells_per_look >= 0.0)) throw std::invalid_argument("radar: cells_per_look must be >= 0");
}

RadarConfig RadarConfig::for_environment(const Environment& env) {
  RadarConfig cfg;
  const Eigen::VectorXd centre = env.bounds.centroid();
  const Eigen::VectorXd g_lo = env.geofence.lo();
  const Eigen::VectorXd g_hi = env.geofence.hi();
  cfg.position = Eigen::Vector3d::Zero();
  for (int d = 0; d < 2; ++d) {
    // Corner of the geofence farthest from the environment centre.
    const double lo_gap = std::abs(g_lo[d] - centre[d]);
    const double hi_gap = std::abs(g_hi[d] - centre[d]);
    cfg.position[d] = hi_gap >= lo_gap ? g_hi[d] : g_lo[d];
  }
  cfg.position[2] = 5.0;
  cfg.boresight_azimuth_deg =
      std::atan2(centre[1] - cfg.position[1], centre[0] - cfg.position[0]) / kDeg;
  cfg.boresight_elevation_deg = 0.0;
  return cfg;
}

SphericalPoint to_spherical(const RadarConfig& cfg, const Eigen::Vector3d& world) {
  const Eigen::Vector3d d = world - cfg.position;
  const double horiz = std::hypot(d.x(), d.y());
  return {d.norm(), std::atan2(d.y(), d.x()), std::atan2(d.z(), horiz)};
}

bool in_field_of_view(const RadarConfig& cfg, const SphericalPoint& sp) {
  if (!(sp.range > 0.0) || sp.range > cfg.max_range) return false;
  const double daz = wrap_angle(sp.azimuth - cfg.boresight_azimuth_deg * kDeg);
  const double del = sp.elevation - cfg.boresight_elevation_deg * kDeg;
  return std::abs(daz) <= 0.5 * cfg.azimuth_span_deg * kDeg &&
         std::abs(del) <= 0.5 * cfg.elevation_span_deg * kDeg;
}

std::optional<RadarDetection> detect(const RadarConfig& cfg, double t,
                                     const Eigen::Vector3d& true_position, Rng& rng) {
  const SphericalPoint sp = to_spherical(cfg, true_position);
  if (!in_field_of_view(cfg, sp)) return std::nullopt;
  if (uniform(rng, 0.0, 1.0) >= cfg.detection_probability) return std::nullopt;

  RadarDetection det;
  det.t = t;
  const double sa = cfg.angle_sigma();
  det.range = sp.range + normal(rng, cfg.range_sigma);
  det.azimuth = sp.azimuth + normal(rng, sa);
  det.elevation = sp.elevation + normal(rng, sa);
  det.range = std::clamp(det.range, 1e-6, cfg.max_range);
  return det;
}

std::vector<RadarDetection> false_alarms(const RadarConfig& cfg, double t, Rng& rng) {
  std::vector<RadarDetection> out;
  if (cfg.false_alarm_rate <= 0.0 || cfg.cells_per_look < 1.0) return out;
  std::binomial_distribution<long long> count(static_cast<long long>(cfg.cells_per_look),
                                              cfg.false_alarm_rate);
  const long long n = count(rng);
  const double az0 = cfg.boresight_azimuth_deg * kDeg;
  const double el0 = cfg.boresight_elevation_deg * kDeg;
  const double haz = 0.5 * cfg.azimuth_span_deg * kDeg;
  const double hel = 0.5 * cfg.elevation_span_deg * kDeg;
  for (long long i = 0; i < n; ++i) {
    RadarDetection d;
    d.t = t;
    d.range = cfg.max_range * (1.0 - uniform(rng, 0.0, 1.0));  // (0, max_range]
    d.azimuth = wrap_angle(az0 + uniform(rng, -haz, haz));
    d.elevation = el0 + uniform(rng, -hel, hel);
    d.is_false_alarm = true;
    out.push_back(d);
  }
  return out;
}

CartesianMeasurement to_cartesian(const RadarDetection& det, const RadarConfig& cfg) {
  const double r = det.range;
  const double ca = std::cos(det.azimuth), sa = std::sin(det.azimuth);
  const double ce = std::cos(det.elevation), se = std::sin(det.elevation);

  CartesianMeasurement m;
  m.t = det.t;
  m.position = cfg.position + Eigen::Vector3d(r * ce * ca, r * ce * sa, r * se);

  Eigen::Matrix3d J;
  J << ce * ca, -r * ce * sa, -r * se * ca,
       ce * sa,  r * ce * ca, -r * se * sa,
       se,       0.0,          r * ce;
  const double sang = cfg.angle_sigma();
  const Eigen::Vector3d var(cfg.range_sigma * cfg.range_sigma, sang * sang, sang * sang);
  m.covariance = J * var.asDiagonal() * J.transpose();
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  return m;
}

std::vector<RadarLook> simulate_looks(const RadarConfig& cfg, const Trajectory& traj, Rng& rng) {
  cfg.validate();
  std::vector<RadarLook> looks;
  looks.reserve(traj.size());
  for (const auto& st : traj.states) {
    RadarLook look;
    look.t = st.t;
    if (auto d = detect(cfg, st.t, st.position(), rng)) look.detections.push_back(*d);
    auto fa = false_alarms(cfg, st.t, rng);
    look.detections.insert(look.detections.end(), fa.begin(), fa.end());
    looks.push_back(std::move(look));
  }
  return looks;
}

void write_detections_csv(std::ostream& os, const std::vector<RadarLook>& looks) {
  os << "t,range,azimuth,elevation,is_false_alarm\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& look : looks) {
    for (const auto& d : look.detections) {
      line.str("");
      line << d.t << ',' << d.range << ',' << d.azimuth << ',' << d.elevation << ','
           << (d.is_false_alarm ? 1 : 0) << '\n';
      os << line.str();
    }
  }
}

std::vector<RadarLook> read_detections_csv(std::istream& is) {
  std::vector<RadarLook> looks;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    RadarDetection d;
    char comma = 0;
    int flag = 0;
    if (!(ss >> d.t >> comma >> d.range >> comma >> d.azimuth >> comma >> d.elevation >> comma >> flag)) {
      throw std::invalid_argument("malformed detection row: " + line);
    }
    d.is_false_alarm = flag != 0;
    if (looks.empty() || looks.back().t != d.t) looks.push_back({d.t, {}});
    looks.back().detections.push_back(d);
  }
  return looks;
}

void to_json(nlohmann::json& j, const RadarConfig& c) {
  j = nlohmann::json{{"position", {c.position.x(), c.position.y(), c.position.z()}},
                     {"field_of_view_deg", {c.azimuth_span_deg, c.elevation_span_deg}},
                     {"boresight_deg", {c.boresight_azimuth_deg, c.boresight_elevation_deg}},
                     {"max_range", c.max_range},
                     {"range_sigma", c.range_sigma},
                     {"cross_range_sigma_at_ref", c.cross_range_sigma_at_ref},
                     {"reference_range", c.reference_range},
                     {"detection_probability", c.detection_probability},
                     {"false_alarm_rate", c.false_alarm_rate},
                     {"cells_per_look", c.cells_per_look},
                     {"center_frequency", c.center_frequency},
                     {"bandwidth", c.bandwidth},
                     {"reference_rcs_dbsm", c.reference_rcs_dbsm}};
}

void from_json(const nlohmann::json& j, RadarConfig& c) {
  if (j.contains("position")) {
    const auto p = j.at("position").get<std::vector<double>>();
    if (p.size() != 3) throw std::invalid_argument("radar position needs 3 values");
    c.position = Eigen::Vector3d(p[0], p[1], p[2]);
  }
  if (j.contains("field_of_view_deg")) {
    const auto f = j.at("field_of_view_deg").get<std::vector<double>>();
    c.azimuth_span_deg = f.at(0);
    c.elevation_span_deg = f.at(1);
  }
  if (j.contains("boresight_deg")) {
    const auto b = j.at("boresight_deg").get<std::vector<double>>();
    c.boresight_azimuth_deg = b.at(0);
    c.boresight_elevation_deg = b.at(1);
  }
  c.max_range = j.value("max_range", c.max_range);
  c.range_sigma = j.value("range_sigma", c.range_sigma);
  c.cross_range_sigma_at_ref = j.value("cross_range_sigma_at_ref", c.cross_range_sigma_at_ref);
  c.reference_range = j.value("reference_range", c.reference_range);
  c.detection_probability = j.value("detection_probability", c.detection_probability);
  c.false_alarm_rate = j.value("false_alarm_rate", c.false_alarm_rate);
  c.cells_per_look = j.value("cells_per_look", c.cells_per_look);
  c.center_frequency = j.value("center_frequency", c.center_frequency);
  c.bandwidth = j.value("bandwidth", c.bandwidth);
  c.reference_rcs_dbsm = j.value("reference_rcs_dbsm", c.reference_rcs_dbsm);
  c.validate();
}

}  // namespace geointent
