#pragma once

#include "geointent/env_model.hpp"
#include "geointent/kinematics.hpp"
#include "geointent/motion_planner.hpp"
#include "geointent/rng.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace geointent {

enum class FlightMode { CV, CA, HCT, CT3D };

std::string to_string(FlightMode m);
FlightMode flight_mode_from_string(const std::string& s);
inline bool is_turning(FlightMode m) { return m == FlightMode::HCT || m == FlightMode::CT3D; }

/// One flight mode with its discretization period and noise intensities.
///
/// Noise follows the piecewise-constant construction: over each period the
/// driving input (acceleration for CV and the turning modes, jerk for CA) is a
/// constant Gaussian with variance intensity / period on every axis.
struct ModeModel {
  FlightMode mode = FlightMode::CV;
  double turn_rate = 0.0;  // rad/s; omega for HCT, Omega for 3DCT
  double period = 0.1;     // s
  Eigen::Vector3d noise_intensity = Eigen::Vector3d::Constant(0.05);
  double turn_rate_noise = 0.01;  // (rad/s)^2/s, only for the augmented slot

  static ModeModel cv(double period, double q = 0.05);
  static ModeModel ca(double period, double q = 0.1);
  static ModeModel hct(double omega, double period, double q = 0.05);
  static ModeModel ct3d(double omega, double period, double q = 0.1);

  /// 9 for CV/CA, 10 (turn-rate slot appended) for HCT/3DCT.
  int state_dim() const { return is_turning(mode) ? 10 : 9; }
  void validate() const;
};

/// Rates below this magnitude use the analytic small-rate limit.
inline constexpr double kSmallTurnRate = 1e-6;

/// Per-axis blocks.
Eigen::Matrix3d cv_block(double period);
Eigen::Matrix3d ca_block(double period);
Eigen::Matrix3d ct3d_block(double omega, double period);
/// Standard horizontal coordinated turn over (x, v_x, a_x, y, v_y, a_y).
Eigen::Matrix<double, 6, 6> hct_block(double omega, double period);

/// Full transition matrix of the mode (see ModeModel::state_dim).
Eigen::MatrixXd transition_matrix(const ModeModel& model);
/// The 9x9 kinematic part, i.e. transition_matrix without the turn-rate slot.
Matrix9d kinematic_transition(const ModeModel& model);
/// Process-noise covariance over the 9-element kinematic state.
Matrix9d process_noise(const ModeModel& model);

struct AugmentedState {
  FlightState state;
  double turn_rate = 0.0;
};

/// One step s_k = F_m s_{k-1} + w. F is built at the model's turn rate; the
/// augmented turn-rate slot is carried through with random-walk noise.
/// Zero noise intensity gives exact linear propagation.
AugmentedState propagate(const AugmentedState& x, const ModeModel& model, Rng& rng);

/// Builds full kinematic ground truth from planner output. Velocities and
/// accelerations come from central differences of moving-average smoothed
/// positions; stored positions are the unsmoothed input. Throws
/// std::invalid_argument for fewer than 3 samples.
Trajectory synthesize_trajectory(const TimedPositions& timed, const std::string& intent_label,
                                 const Environment& env, int smoothing_window = 5);

/// Horizontal turn rate (v_x a_y - v_y a_x) / (v_x^2 + v_y^2); zero below 0.1 m/s.
double horizontal_turn_rate(const Vector9d& s);

/// Line-delimited trajectory persistence; round trip is bit-exact.
nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);
void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories(std::istream& is);

}  // namespace geointent
