#include "geointent/radar_sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace geointent;

namespace {

RadarConfig origin_radar() {
  RadarConfig c;
  c.false_alarm_rate = 0.0;
  return c;
}

RadarDetection spherical(double r, double az, double el) {
  RadarDetection d;
  d.range = r;
  d.azimuth = az;
  d.elevation = el;
  return d;
}

}  // namespace

TEST_SUITE("radar-sim") {

TEST_CASE("targets outside the field of view are never detected") {
  RadarConfig c = origin_radar();
  c.detection_probability = 1.0;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(detect(c, 0.0, Eigen::Vector3d(-100, 5, 0), rng).has_value());
    CHECK_FALSE(detect(c, 0.0, Eigen::Vector3d(10, 100, 0), rng).has_value());   // 84 deg off boresight
    CHECK_FALSE(detect(c, 0.0, Eigen::Vector3d(3000, 0, 0), rng).has_value());   // beyond max range
  }
  CHECK(detect(c, 0.0, Eigen::Vector3d(100, 90, 0), rng).has_value());  // 42 deg, inside
}

TEST_CASE("noise-free detection equals the truth") {
  RadarConfig c = origin_radar();
  c.detection_probability = 1.0;
  c.range_sigma = 0.0;
  c.cross_range_sigma_at_ref = 0.0;
  Rng rng(3);
  const auto d = detect(c, 1.5, Eigen::Vector3d(100, 0, 0), rng);
  REQUIRE(d.has_value());
  CHECK(d->range == 100.0);
  CHECK(d->azimuth == 0.0);
  CHECK(d->elevation == 0.0);
  CHECK(d->t == 1.5);
  CHECK_FALSE(d->is_false_alarm);
}

TEST_CASE("cross-range error at 500 m") {
  const RadarConfig c = origin_radar();
  Rng rng(5);
  double sum = 0, sq = 0;
  int n = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto d = detect(c, 0.0, Eigen::Vector3d(500, 0, 0), rng);
    if (!d) continue;
    const double e = to_cartesian(*d, c).position.y();
    sum += e;
    sq += e * e;
    ++n;
  }
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(sd == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("detection rate follows the detection probability") {
  const RadarConfig c = origin_radar();
  Rng rng(6);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) hits += detect(c, 0.0, Eigen::Vector3d(300, 40, 10), rng).has_value();
  CHECK(hits / 20000.0 == doctest::Approx(0.95).epsilon(0.01));
}

TEST_CASE("detections are unbiased") {
  RadarConfig c = origin_radar();
  c.detection_probability = 1.0;
  const Eigen::Vector3d truth(800, 300, 60);
  const SphericalPoint sp = to_spherical(c, truth);
  Rng rng(7);
  double er = 0, ea = 0, ee = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto d = detect(c, 0.0, truth, rng);
    er += d->range - sp.range;
    ea += d->azimuth - sp.azimuth;
    ee += d->elevation - sp.elevation;
  }
  CHECK(std::abs(er / n) < 0.05 * c.range_sigma);
  CHECK(std::abs(ea / n) < 0.05 * c.angle_sigma());
  CHECK(std::abs(ee / n) < 0.05 * c.angle_sigma());
}

TEST_CASE("field-of-view decision does not depend on the noise scale") {
  RadarConfig quiet = origin_radar(), loud = origin_radar();
  quiet.range_sigma = 0.01;
  loud.range_sigma = 50.0;
  loud.cross_range_sigma_at_ref = 500.0;
  Rng draw(9);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d p(uniform(draw, -500, 2500), uniform(draw, -2000, 2000), uniform(draw, -50, 500));
    Rng a(i), b(i);
    CHECK(detect(quiet, 0.0, p, a).has_value() == detect(loud, 0.0, p, b).has_value());
  }
}

TEST_CASE("false alarm counts") {
  RadarConfig c;
  Rng rng(10);
  c.false_alarm_rate = 0.0;
  for (int i = 0; i < 100; ++i) CHECK(false_alarms(c, 0.0, rng).empty());

  c.false_alarm_rate = 1e-6;
  c.cells_per_look = 1e6;
  double total = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto fa = false_alarms(c, 0.0, rng);
    total += static_cast<double>(fa.size());
    for (const auto& d : fa) {
      CHECK(d.is_false_alarm);
      CHECK(d.range > 0.0);
      CHECK(d.range <= c.max_range);
      CHECK(in_field_of_view(c, {d.range, d.azimuth, d.elevation}));
    }
  }
  CHECK(total / 10000 == doctest::Approx(1.0).epsilon(0.05));

  c.cells_per_look = 1e4;
  int looks_with_alarm = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) looks_with_alarm += !false_alarms(c, 0.0, rng).empty();
  const double expected = 1.0 - std::pow(1.0 - 1e-6, 1e4);
  CHECK(looks_with_alarm / static_cast<double>(n) == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("spherical to cartesian") {
  const RadarConfig c = origin_radar();
  CHECK((to_cartesian(spherical(100, 0, 0), c).position - Eigen::Vector3d(100, 0, 0)).norm() < 1e-12);
  CHECK((to_cartesian(spherical(100, std::numbers::pi / 2, 0), c).position - Eigen::Vector3d(0, 100, 0)).norm() < 1e-12);
  const double near = to_cartesian(spherical(100, 0, 0), c).covariance(1, 1);
  const double far = to_cartesian(spherical(1000, 0, 0), c).covariance(1, 1);
  CHECK(far / near == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("conversion inverts the spherical projection") {
  RadarConfig c = origin_radar();
  c.position = Eigen::Vector3d(750, 1000, 5);
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p(uniform(rng, 0, 1050), uniform(rng, 0, 1050), uniform(rng, 0, 400));
    const SphericalPoint sp = to_spherical(c, p);
    const auto m = to_cartesian(spherical(sp.range, sp.azimuth, sp.elevation), c);
    CHECK((m.position - p).norm() < 1e-9);
    CHECK((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m.covariance).eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("exact inversion at the origin radar") {
  const RadarConfig c = origin_radar();
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p(uniform(rng, 1, 500), uniform(rng, -500, 500), uniform(rng, 0, 300));
    const SphericalPoint sp = to_spherical(c, p);
    CHECK((to_cartesian(spherical(sp.range, sp.azimuth, sp.elevation), c).position - p).norm() < 1e-12);
  }
}

TEST_CASE("radar placement for the scaled environment") {
  const Environment env = Environment::example_2d().scaled(10);
  const RadarConfig c = RadarConfig::for_environment(env);
  CHECK(contains(env.geofence, Eigen::Vector2d(c.position.head<2>())));
  CHECK(c.position.z() == 5.0);
  // Every point of the bounded area lies inside the 90 degree sector.
  for (double x : {1.0, 525.0, 999.0}) {
    for (double y : {1.0, 525.0, 999.0}) {
      const Eigen::Vector3d p(x, y, 0.0);
      if ((p - c.position).norm() < 100.0) continue;
      CHECK(in_field_of_view(c, to_spherical(c, p)));
    }
  }
}

TEST_CASE("looks and the detection csv") {
  Trajectory t;
  for (int k = 0; k < 40; ++k) {
    FlightState s;
    s.t = 0.1 * k;
    s.s[kX] = 200 + k;
    s.s[kY] = 20;
    t.states.push_back(s);
  }
  RadarConfig c;
  Rng rng(14);
  const auto looks = simulate_looks(c, t, rng);
  CHECK(looks.size() == t.size());
  std::stringstream ss;
  write_detections_csv(ss, looks);
  const auto back = read_detections_csv(ss);
  std::size_t n = 0, m = 0;
  for (const auto& l : looks) n += l.detections.size();
  for (const auto& l : back) {
    m += l.detections.size();
    CHECK_FALSE(l.detections.empty());
  }
  CHECK(n == m);
  // 17 significant digits make the round trip exact.
  for (const auto& l : looks) {
    if (l.detections.empty()) continue;
    const auto it = std::find_if(back.begin(), back.end(), [&](const RadarLook& b) { return b.t == l.t; });
    REQUIRE(it != back.end());
    CHECK(it->detections.front().range == l.detections.front().range);
    CHECK(it->detections.front().azimuth == l.detections.front().azimuth);
  }
}

TEST_CASE("config validation and json") {
  RadarConfig c;
  c.detection_probability = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RadarConfig{};
  c.azimuth_span_deg = 400;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RadarConfig{};
  c.position = Eigen::Vector3d(1, 2, 3);
  c.false_alarm_rate = 1e-5;
  const RadarConfig back = nlohmann::json(c).get<RadarConfig>();
  CHECK(back.position == c.position);
  CHECK(back.false_alarm_rate == 1e-5);
  CHECK(back.center_frequency == 24.55e9);
  CHECK(c.angle_sigma() == doctest::Approx(0.0004));
}

}  // TEST_SUITE
