#include "geointent/radar_sim.hpp"
#include "geointent/tracking_imm.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace geointent;

namespace {

CartesianMeasurement measure(const Vector9d& truth, double t, double sigma, Rng& rng) {
  CartesianMeasurement z;
  z.t = t;
  z.position = position_selector() * truth;
  if (sigma > 0.0) {
    for (int i = 0; i < 3; ++i) z.position[i] += normal(rng, sigma);
  }
  z.covariance = Eigen::Matrix3d::Identity() * std::max(sigma * sigma, 0.0);
  return z;
}

TrackState start_at(const Vector9d& truth, double p0 = 100.0) {
  TrackState s;
  s.mean = truth;
  s.covariance = Matrix9d::Identity() * p0;
  return s;
}

TrackState perturbed(Vector9d truth, Rng& rng) {
  for (int i = 0; i < 9; ++i) truth[i] += normal(rng, 3.0);
  return start_at(truth);
}

Vector9d moving(double vx, double vy) {
  Vector9d s = Vector9d::Zero();
  s[kX] = 500;
  s[kY] = 300;
  s[kZ] = 20;
  s[kVx] = vx;
  s[kVy] = vy;
  return s;
}

bool is_simplex(const Eigen::VectorXd& p) {
  return std::abs(p.sum() - 1.0) < 1e-12 && p.minCoeff() >= 0.0;
}

std::vector<TrackPoint> synthetic_track(std::size_t n, int segment = 0) {
  std::vector<TrackPoint> track(n);
  for (std::size_t k = 0; k < n; ++k) {
    track[k].t = 0.1 * static_cast<double>(k);
    track[k].segment = segment;
    track[k].updated = true;
    track[k].estimate.state.s[kVx] = static_cast<double>(k);
    track[k].estimate.mode_probabilities = Eigen::VectorXd::Constant(4, 0.25);
  }
  return track;
}

}  // namespace

TEST_SUITE("tracking-imm") {

TEST_CASE("noise-free CV tracking converges monotonically") {
  ModeModel m = ModeModel::cv(0.1);
  m.noise_intensity.setZero();
  Vector9d truth = moving(10, -4);
  TrackState track = start_at(truth + (Vector9d() << 5, 2, 0, -3, 1, 0, 2, -1, 0).finished(), 100.0);
  const Matrix9d F = kinematic_transition(m);
  Rng rng(0);
  double prev = 1e9;
  for (int k = 1; k <= 30; ++k) {
    truth = F * truth;
    CartesianMeasurement z = measure(truth, 0.1 * k, 0.0, rng);
    z.covariance = Eigen::Matrix3d::Identity() * 1e-12;
    track = kf_step(track, m, z);
    const double err = (track.mean - truth).norm();
    CHECK(err <= prev + 1e-9);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("repeated measurements of a static target shrink the covariance") {
  const ModeModel m = ModeModel::cv(0.1);
  const Vector9d truth = moving(0, 0);
  TrackState track = start_at(truth, 100.0);
  Rng rng(0);
  const CartesianMeasurement z0 = measure(truth, 0.0, 1.0, rng);
  double prev = track.covariance.trace();
  for (int k = 1; k <= 200; ++k) {
    CartesianMeasurement z = z0;
    z.t = 0.1 * k;
    track = kf_step(track, m, z);
    CHECK(track.covariance.trace() <= prev + 1e-12);
    prev = track.covariance.trace();
  }
}

TEST_CASE("kf_step checks the measurement time") {
  const TrackState track = start_at(moving(1, 1));
  Rng rng(0);
  CHECK_THROWS_AS(kf_step(track, ModeModel::cv(0.1), measure(track.mean, 0.2, 1.0, rng)), std::invalid_argument);
}

TEST_CASE("singular innovation covariance is a numerical failure") {
  TrackState track = start_at(moving(1, 1), 0.0);
  track.covariance.setZero();
  CartesianMeasurement z;
  z.covariance.setZero();
  CHECK_THROWS_AS(innovation(track, z), NumericalFailure);
}

TEST_CASE("covariances stay symmetric positive definite") {
  const ImmBank bank = ImmBank::standard(2, 0.1);
  Rng rng(21);
  for (const auto& mode : bank.modes) {
    TrackState track = start_at(moving(8, 3), 50.0);
    for (int k = 1; k <= 2500; ++k) {
      Vector9d truth = track.mean;
      for (int i = 0; i < 3; ++i) truth[3 * i] += normal(rng, 5.0);
      CartesianMeasurement z = measure(truth, 0.1 * k, uniform(rng, 0.1, 5.0), rng);
      track = kf_step(track, mode, z);
      CHECK((track.covariance - track.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
      if (k % 50 == 0) {
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix9d>(track.covariance).eigenvalues().minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("identity transitions keep the mode probabilities") {
  ImmBank bank = ImmBank::standard(2, 0.1);
  bank.transition = Eigen::MatrixXd::Identity(4, 4);
  IMMState imm = imm_init(start_at(moving(10, 0)), bank, (Eigen::VectorXd(4) << 1, 0, 0, 0).finished());
  Rng rng(1);
  Vector9d truth = moving(10, 0);
  for (int k = 1; k <= 100; ++k) {
    truth = kinematic_transition(ModeModel::hct(0.3, 0.1)) * truth;
    imm = imm_step(imm, measure(truth, 0.1 * k, 1.0, rng));
    CHECK(imm.mode_probabilities == (Eigen::VectorXd(4) << 1, 0, 0, 0).finished());
  }
}

TEST_CASE("mode probabilities remain a simplex") {
  const ImmBank bank = ImmBank::standard(2, 0.1);
  Rng rng(2);
  IMMState imm = imm_init(start_at(moving(12, -5)), bank);
  Vector9d truth = moving(12, -5);
  for (int k = 1; k <= 2000; ++k) {
    const auto& mode = bank.modes[static_cast<std::size_t>(k / 100) % bank.modes.size()];
    truth = kinematic_transition(mode) * truth;
    // Occasional wild measurement.
    const double sigma = (k % 97 == 0) ? 200.0 : 1.0;
    imm = imm_step(imm, measure(truth, 0.1 * k, sigma, rng));
    CHECK(is_simplex(imm.mode_probabilities));
  }
}

TEST_CASE("single-mode IMM equals the Kalman filter") {
  ImmBank bank;
  bank.modes = {ModeModel::ca(0.1, 0.3)};
  bank.transition = Eigen::MatrixXd::Ones(1, 1);
  TrackState kf = start_at(moving(3, 4));
  IMMState imm = imm_init(kf, bank);
  Rng rng(4);
  Vector9d truth = moving(3, 4);
  for (int k = 1; k <= 200; ++k) {
    truth = kinematic_transition(bank.modes[0]) * truth;
    const auto z = measure(truth, 0.1 * k, 1.5, rng);
    kf = kf_step(kf, bank.modes[0], z);
    imm = imm_step(imm, z);
    CHECK(imm.per_mode[0].mean == kf.mean);
    CHECK(imm.per_mode[0].covariance == kf.covariance);
  }
}

TEST_CASE("pure CV flight is recognised") {
  // Radar-default measurement noise; "sustained" means the CV probability stays
  // above 0.8 for at least 90% of the steps after the first 30.
  const ImmBank bank = ImmBank::standard(2, 0.1);
  RadarConfig radar = RadarConfig::for_environment(Environment::example_2d().scaled(10));
  radar.detection_probability = 1.0;
  const ModeModel truth_model = ModeModel::cv(0.1, 0.0);
  int reached = 0;
  double above = 0.0, steps = 0.0;
  for (int run = 0; run < 20; ++run) {
    Rng rng(100 + run);
    Vector9d truth = moving(0, 0);
    truth[kX] = uniform(rng, 350, 550);
    truth[kY] = uniform(rng, 350, 550);
    const double speed = uniform(rng, 5, 25), heading = uniform(rng, -std::numbers::pi, std::numbers::pi);
    truth[kVx] = speed * std::cos(heading);
    truth[kVy] = speed * std::sin(heading);
    IMMState imm = imm_init(perturbed(truth, rng), bank);
    bool hit = false;
    for (int k = 1; k <= 150; ++k) {
      truth = kinematic_transition(truth_model) * truth;
      const auto det = detect(radar, 0.1 * k, position_selector() * truth, rng);
      REQUIRE(det.has_value());
      CartesianMeasurement z = to_cartesian(*det, radar);
      imm = imm_step(imm, z);
      const double p = imm.mode_probabilities[0];
      if (k <= 30 && p > 0.8) hit = true;
      if (k > 30) {
        above += p > 0.8;
        steps += 1.0;
      }
    }
    reached += hit;
  }
  CHECK(reached >= 18);
  CHECK(above / steps >= 0.9);
}

TEST_CASE("turn rate estimate during a coordinated turn") {
  const ImmBank bank = ImmBank::standard(2, 0.1);
  Rng rng(5);
  Vector9d truth = moving(15, 0);
  IMMState imm = imm_init(start_at(truth, 10.0), bank);
  const Matrix9d F = kinematic_transition(ModeModel::hct(0.2, 0.1));
  double sum = 0.0;
  int n = 0;
  for (int k = 1; k <= 150; ++k) {
    truth = F * truth;
    imm = imm_step(imm, measure(truth, 0.1 * k, 0.5, rng));
    if (k > 50) {
      sum += combined_estimate(imm, 2).turn_rate;
      ++n;
    }
  }
  CHECK(sum / n == doctest::Approx(0.2).epsilon(0.25));
}

TEST_CASE("combined estimate") {
  const ImmBank bank = ImmBank::standard(2, 0.1);
  Rng rng(6);
  IMMState imm = imm_init(start_at(moving(1, 2)), bank, (Eigen::VectorXd(4) << 0, 1, 0, 0).finished());
  for (auto& m : imm.per_mode) m = perturbed(moving(1, 2), rng);
  const CombinedEstimate single = combined_estimate(imm);
  CHECK(single.state.s == imm.per_mode[1].mean);
  CHECK(single.covariance == imm.per_mode[1].covariance);

  IMMState sym = imm_init(start_at(moving(10, 0)), bank, (Eigen::VectorXd(4) << 0, 0, 0.5, 0.5).finished());
  CHECK(std::abs(combined_estimate(sym).turn_rate) < 1e-15);

  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd p(4);
    for (int i = 0; i < 4; ++i) p[i] = uniform(rng, 0, 1);
    IMMState mix = imm_init(start_at(moving(0, 0)), bank, p);
    for (auto& m : mix.per_mode) m = perturbed(moving(5, 5), rng);
    const Vector9d c = combined_estimate(mix).state.s;
    for (int i = 0; i < 9; ++i) {
      double lo = 1e300, hi = -1e300;
      for (const auto& m : mix.per_mode) {
        lo = std::min(lo, m.mean[i]);
        hi = std::max(hi, m.mean[i]);
      }
      CHECK(c[i] >= lo - 1e-9);
      CHECK(c[i] <= hi + 1e-9);
    }
  }
}

TEST_CASE("normalized innovation squared is consistent") {
  ModeModel m = ModeModel::cv(0.1, 0.05);
  Rng rng(7);
  double sum = 0.0;
  int n = 0;
  for (int run = 0; run < 10; ++run) {
    Vector9d truth = moving(10, 5);
    TrackState track = start_at(truth, 1.0);
    AugmentedState x{{0.0, truth}, 0.0};
    for (int k = 1; k <= 500; ++k) {
      x = propagate(x, m, rng);
      track = kf_step(track, m, measure(x.state.s, 0.1 * k, 1.0, rng));
      if (k > 50) {
        sum += track.nis;
        ++n;
      }
    }
  }
  CHECK(sum / n >= 0.8 * 3);
  CHECK(sum / n <= 1.2 * 3);
}

TEST_CASE("feature windows") {
  CHECK(window_stride(50, 0.9) == 5);
  CHECK(window_stride(150, 0.9) == 15);
  CHECK(window_stride(3, 0.9) == 1);
  CHECK(extract_features(synthetic_track(200), 2, 50, 0.9, "a", "t", false).size() == 31);
  CHECK(extract_features(synthetic_track(150), 2, 150, 0.9, "a", "t", false).size() == 1);
  CHECK(extract_features(synthetic_track(149), 2, 150, 0.9, "a", "t", false).empty());
  const auto part = extract_features(synthetic_track(200), 2, 50, 0.0, "a", "t", true);
  REQUIRE(part.size() == 4);
  for (std::size_t i = 0; i < part.size(); ++i) {
    CHECK(part[i].features(0, 0) == 50.0 * static_cast<double>(i));
    CHECK(part[i].intrusion);
    CHECK(part[i].features.rows() == 50);
    CHECK(part[i].features.cols() == 5);
  }
  for (int L = 50; L < 400; L += 7) {
    for (int W : {10, 50, 150}) {
      if (L < W) continue;
      const int stride = window_stride(W, 0.9);
      CHECK(extract_features(synthetic_track(static_cast<std::size_t>(L)), 3, W, 0.9, "a", "t", false).size() ==
            static_cast<std::size_t>((L - W) / stride + 1));
    }
  }
  CHECK_THROWS_AS(extract_features(synthetic_track(10), 2, 5, 1.0, "a", "t", false), std::invalid_argument);
}

TEST_CASE("windows never cross segment boundaries") {
  auto track = synthetic_track(120, 0);
  const auto second = synthetic_track(80, 1);
  track.insert(track.end(), second.begin(), second.end());
  const auto w = extract_features(track, 2, 50, 0.9, "a", "t", false);
  CHECK(w.size() == 15 + 7);
}

TEST_CASE("feature rows") {
  CombinedEstimate e;
  e.state.s << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  e.turn_rate = 0.1;
  CHECK(feature_row(e, 2) == (Eigen::VectorXd(5) << 2, 5, 3, 6, 0.1).finished());
  CHECK(feature_row(e, 3) == (Eigen::VectorXd(7) << 2, 5, 8, 3, 6, 9, 0.1).finished());
}

TEST_CASE("tracker follows a radar-observed straight flight") {
  RadarConfig radar = RadarConfig::for_environment(Environment::example_2d().scaled(10));
  Trajectory t;
  for (int k = 0; k < 600; ++k) {
    FlightState s;
    s.t = 0.1 * k;
    s.s[kX] = 100 + 1.2 * k;
    s.s[kVx] = 12;
    s.s[kY] = 150 + 0.5 * k;
    s.s[kVy] = 5;
    t.states.push_back(s);
  }
  Rng rng(8);
  const auto looks = simulate_looks(radar, t, rng);
  const auto track = run_tracker(looks, radar, TrackerConfig::standard(2));
  REQUIRE(track.size() > 590);
  int max_segment = 0;
  for (const auto& p : track) max_segment = std::max(max_segment, p.segment);
  CHECK(max_segment == 0);
  double sq = 0.0;
  int n = 0;
  for (const auto& p : track) {
    const auto k = static_cast<std::size_t>(std::lround(p.t / 0.1));
    if (k < 50) continue;
    sq += (p.estimate.state.position() - t.states[k].position()).head<2>().squaredNorm();
    ++n;
  }
  CHECK(std::sqrt(sq / n) < 2.0);
  CHECK(track.back().estimate.state.s[kVx] == doctest::Approx(12.0).epsilon(0.1));
}

TEST_CASE("track and window csv round trips") {
  auto track = synthetic_track(60);
  track[3].updated = false;
  track[7].estimate.turn_rate = -0.2;
  std::stringstream ss;
  write_track_csv(ss, track);
  const auto back = read_track_csv(ss);
  REQUIRE(back.size() == track.size());
  CHECK_FALSE(back[3].updated);
  CHECK(back[7].estimate.turn_rate == -0.2);
  CHECK(back[9].estimate.state.s == track[9].estimate.state.s);

  const auto windows = extract_features(track, 2, 20, 0.5, "harmless", "harmless_0001", false);
  std::stringstream ws;
  write_windows_csv(ws, windows);
  const auto wb = read_windows_csv(ws);
  REQUIRE(wb.size() == windows.size());
  CHECK(wb[1].label == "harmless");
  CHECK(wb[1].trajectory_id == "harmless_0001");
  CHECK(wb[1].start_time == windows[1].start_time);
  CHECK(wb[1].features == windows[1].features);
}

TEST_CASE("bank construction") {
  const ImmBank b2 = ImmBank::standard(2, 0.1);
  REQUIRE(b2.modes.size() == 4);
  CHECK(b2.modes[2].mode == FlightMode::HCT);
  CHECK(b2.modes[2].turn_rate == 0.2);
  CHECK(b2.modes[3].turn_rate == -0.2);
  CHECK(b2.transition(0, 0) == kTrackerStay);
  CHECK(b2.transition.rowwise().sum().isApprox(Eigen::VectorXd::Ones(4)));
  const ImmBank b3 = ImmBank::standard(3, 0.1);
  CHECK(b3.modes[2].mode == FlightMode::CT3D);
  ImmBank bad = b2;
  bad.transition(0, 1) += 0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  const TrackerConfig cfg = TrackerConfig::standard(3);
  const TrackerConfig back = nlohmann::json(cfg).get<TrackerConfig>();
  CHECK(back.dim == 3);
  CHECK(back.gate_threshold() == doctest::Approx(cfg.gate_threshold()));
  CHECK(cfg.gate_threshold() == doctest::Approx(13.9314).epsilon(1e-4));
}

}  // TEST_SUITE
