#include "geointent/flight_dynamics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace geointent {

std::string to_string(FlightMode m) {
  switch (m) {
    case FlightMode::CV: return "CV";
    case FlightMode::CA: return "CA";
    case FlightMode::HCT: return "HCT";
    case FlightMode::CT3D: return "3DCT";
  }
  return "?";
}

FlightMode flight_mode_from_string(const std::string& s) {
  if (s == "CV") return FlightMode::CV;
  if (s == "CA") return FlightMode::CA;
  if (s == "HCT") return FlightMode::HCT;
  if (s == "3DCT") return FlightMode::CT3D;
  throw std::invalid_argument("unknown flight mode '" + s + "'");
}

ModeModel ModeModel::cv(double period, double q) {
  return {FlightMode::CV, 0.0, period, Eigen::Vector3d::Constant(q)};
}
ModeModel ModeModel::ca(double period, double q) {
  return {FlightMode::CA, 0.0, period, Eigen::Vector3d::Constant(q)};
}
ModeModel ModeModel::hct(double omega, double period, double q) {
  return {FlightMode::HCT, omega, period, Eigen::Vector3d::Constant(q)};
}
ModeModel ModeModel::ct3d(double omega, double period, double q) {
  return {FlightMode::CT3D, omega, period, Eigen::Vector3d::Constant(q)};
}

void ModeModel::validate() const {
  if (!(period > 0.0)) throw std::invalid_argument("mode model: period must be > 0");
  if (!(noise_intensity.array() >= 0.0).all() || !(turn_rate_noise >= 0.0)) {
    throw std::invalid_argument("mode model: noise intensities must be >= 0");
  }
  if (!std::isfinite(turn_rate)) throw std::invalid_argument("mode model: turn rate not finite");
}

Eigen::Matrix3d cv_block(double T) {
  Eigen::Matrix3d A;
  A << 1, T, 0,
       0, 1, 0,
       0, 0, 0;
  return A;
}

Eigen::Matrix3d ca_block(double T) {
  Eigen::Matrix3d A;
  A << 1, T, 0.5 * T * T,
       0, 1, T,
       0, 0, 1;
  return A;
}

namespace {

// sin(wT)/w, (1 - cos wT)/w and (1 - cos wT)/w^2 in cancellation-free form,
// with their w -> 0 limits.
struct TurnTerms {
  double s, c, sin_over_w, one_minus_cos_over_w, one_minus_cos_over_w2;
};

TurnTerms turn_terms(double w, double T) {
  if (std::abs(w) < kSmallTurnRate) return {0.0, 1.0, T, 0.0, 0.5 * T * T};
  const double half = std::sin(0.5 * w * T);
  const double omc = 2.0 * half * half;
  return {std::sin(w * T), std::cos(w * T), std::sin(w * T) / w, omc / w, omc / (w * w)};
}

}  // namespace

Eigen::Matrix3d ct3d_block(double w, double T) {
  const TurnTerms k = turn_terms(w, T);
  const double ws = std::abs(w) < kSmallTurnRate ? 0.0 : w * k.s;
  Eigen::Matrix3d A;
  A << 1, k.sin_over_w, k.one_minus_cos_over_w2,
       0, k.c, k.sin_over_w,
       0, -ws, k.c;
  return A;
}

Eigen::Matrix<double, 6, 6> hct_block(double w, double T) {
  const TurnTerms k = turn_terms(w, T);
  const bool small = std::abs(w) < kSmallTurnRate;
  const double ws = small ? 0.0 : w * k.s;
  const double wc = small ? 0.0 : w * k.c;
  // Columns of a_x and a_y are zero: the turn is driven by velocity alone.
  Eigen::Matrix<double, 6, 6> A;
  //    x   v_x                       a_x y   v_y                       a_y
  A <<  1,  k.sin_over_w,             0,  0,  -k.one_minus_cos_over_w,  0,
        0,  k.c,                      0,  0,  -k.s,                     0,
        0,  -ws,                      0,  0,  -wc,                      0,
        0,  k.one_minus_cos_over_w,   0,  1,  k.sin_over_w,             0,
        0,  k.s,                      0,  0,  k.c,                      0,
        0,  wc,                       0,  0,  -ws,                      0;
  return A;
}

Matrix9d kinematic_transition(const ModeModel& m) {
  Matrix9d F = Matrix9d::Zero();
  const double T = m.period;
  switch (m.mode) {
    case FlightMode::CV:
      for (int a = 0; a < 3; ++a) F.block<3, 3>(3 * a, 3 * a) = cv_block(T);
      break;
    case FlightMode::CA:
      for (int a = 0; a < 3; ++a) F.block<3, 3>(3 * a, 3 * a) = ca_block(T);
      break;
    case FlightMode::HCT:
      F.block<6, 6>(0, 0) = hct_block(m.turn_rate, T);
      F.block<3, 3>(6, 6) = cv_block(T);
      break;
    case FlightMode::CT3D:
      for (int a = 0; a < 3; ++a) F.block<3, 3>(3 * a, 3 * a) = ct3d_block(m.turn_rate, T);
      break;
  }
  return F;
}

Eigen::MatrixXd transition_matrix(const ModeModel& m) {
  m.validate();
  const Matrix9d F9 = kinematic_transition(m);
  if (!is_turning(m.mode)) return F9;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(10, 10);
  F.topLeftCorner<9, 9>() = F9;
  F(9, 9) = 1.0;
  return F;
}

namespace {

// Noise gain per axis: acceleration-driven for CV/HCT, jerk-driven for CA/3DCT.
Eigen::Vector3d noise_gain(FlightMode mode, double T) {
  if (mode == FlightMode::CA || mode == FlightMode::CT3D) {
    return {T * T * T / 6.0, 0.5 * T * T, T};
  }
  return {0.5 * T * T, T, 1.0};
}

}  // namespace

Matrix9d process_noise(const ModeModel& m) {
  Matrix9d Q = Matrix9d::Zero();
  const Eigen::Vector3d g = noise_gain(m.mode, m.period);
  for (int a = 0; a < 3; ++a) {
    Q.block<3, 3>(3 * a, 3 * a) = (m.noise_intensity[a] / m.period) * g * g.transpose();
  }
  return Q;
}

AugmentedState propagate(const AugmentedState& x, const ModeModel& m, Rng& rng) {
  m.validate();
  AugmentedState out;
  out.state.t = x.state.t + m.period;
  out.state.s = kinematic_transition(m) * x.state.s;
  const Eigen::Vector3d g = noise_gain(m.mode, m.period);
  for (int a = 0; a < 3; ++a) {
    const double sigma = std::sqrt(m.noise_intensity[a] / m.period);
    if (sigma > 0.0) out.state.s.segment<3>(3 * a) += g * normal(rng, sigma);
  }
  out.turn_rate = x.turn_rate;
  if (is_turning(m.mode) && m.turn_rate_noise > 0.0) {
    out.turn_rate += normal(rng, std::sqrt(m.turn_rate_noise * m.period));
  }
  return out;
}

double horizontal_turn_rate(const Vector9d& s) {
  const double v2 = s[kVx] * s[kVx] + s[kVy] * s[kVy];
  if (v2 < 0.01) return 0.0;
  return (s[kVx] * s[kAy] - s[kVy] * s[kAx]) / v2;
}

Trajectory synthesize_trajectory(const TimedPositions& timed, const std::string& intent_label,
                                 const Environment& env, int smoothing_window) {
  const std::size_t n = timed.size();
  if (n < 3) throw std::invalid_argument("synthesize_trajectory: need at least 3 samples");
  if (smoothing_window < 1) throw std::invalid_argument("synthesize_trajectory: window must be >= 1");
  const int dim = static_cast<int>(timed.positions.front().size());
  if (dim != env.dim) throw std::invalid_argument("synthesize_trajectory: dimensionality mismatch");
  const double dt = timed.dt;

  // Centered moving average; the window shrinks symmetrically at the ends
  // so affine motion is reproduced exactly.
  const int half = smoothing_window / 2;
  std::vector<Eigen::Vector3d> smooth(n, Eigen::Vector3d::Zero());
  for (std::size_t k = 0; k < n; ++k) {
    const int h = std::min<int>({half, static_cast<int>(k), static_cast<int>(n - 1 - k)});
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int j = -h; j <= h; ++j) acc.head(dim) += timed.positions[k + j];
    smooth[k] = acc / (2 * h + 1);
  }

  auto velocity = [&](std::size_t k) -> Eigen::Vector3d {
    if (k == 0) return (-3.0 * smooth[0] + 4.0 * smooth[1] - smooth[2]) / (2.0 * dt);
    if (k == n - 1) return (3.0 * smooth[n - 1] - 4.0 * smooth[n - 2] + smooth[n - 3]) / (2.0 * dt);
    return (smooth[k + 1] - smooth[k - 1]) / (2.0 * dt);
  };
  auto acceleration = [&](std::size_t k) -> Eigen::Vector3d {
    const std::size_t c = std::clamp<std::size_t>(k, 1, n - 2);
    return (smooth[c + 1] - 2.0 * smooth[c] + smooth[c - 1]) / (dt * dt);
  };

  Trajectory traj;
  traj.intent = intent_label;
  traj.environment_id = env.id;
  traj.dim = dim;
  traj.dt = dt;
  traj.states.resize(n);
  traj.turn_rates.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    FlightState& st = traj.states[k];
    st.t = timed.t[k];
    const Eigen::Vector3d v = velocity(k);
    const Eigen::Vector3d a = acceleration(k);
    for (int d = 0; d < 3; ++d) {
      st.s[3 * d] = d < dim ? timed.positions[k][d] : 0.0;
      st.s[3 * d + 1] = d < dim ? v[d] : 0.0;
      st.s[3 * d + 2] = d < dim ? a[d] : 0.0;
    }
    traj.turn_rates[k] = horizontal_turn_rate(st.s);
  }
  traj.intrusion_time = intrusion_time(traj, env.geofence);
  return traj;
}

nlohmann::json trajectory_to_json(const Trajectory& traj) {
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row;
    row.reserve(11);
    row.push_back(traj.states[k].t);
    row.insert(row.end(), traj.states[k].s.data(), traj.states[k].s.data() + 9);
    row.push_back(traj.turn_rates[k]);
    samples.push_back(std::move(row));
  }
  nlohmann::json j{{"id", traj.id},
                   {"intent", traj.intent},
                   {"environment", traj.environment_id},
                   {"dim", traj.dim},
                   {"dt", traj.dt}};
  j["intrusion_time"] = traj.intrudes() ? nlohmann::json(traj.intrusion_time) : nlohmann::json("inf");
  j["samples"] = std::move(samples);
  return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory traj;
  traj.id = j.at("id").get<std::string>();
  traj.intent = j.at("intent").get<std::string>();
  traj.environment_id = j.value("environment", std::string());
  traj.dim = j.at("dim").get<int>();
  traj.dt = j.at("dt").get<double>();
  const auto& it = j.at("intrusion_time");
  traj.intrusion_time = it.is_string() ? kNeverIntrudes : it.get<double>();
  for (const auto& row : j.at("samples")) {
    if (row.size() != 11) throw std::invalid_argument("trajectory sample must have 11 values");
    FlightState st;
    st.t = row[0].get<double>();
    for (int i = 0; i < 9; ++i) st.s[i] = row[i + 1].get<double>();
    traj.states.push_back(st);
    traj.turn_rates.push_back(row[10].get<double>());
  }
  return traj;
}

void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs) {
  for (const auto& t : trajs) os << trajectory_to_json(t).dump() << '\n';
}

std::vector<Trajectory> read_trajectories(std::istream& is) {
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(trajectory_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace geointent
