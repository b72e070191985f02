#pragma once

#include "geointent/flight_dynamics.hpp"
#include "geointent/radar_sim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace geointent {

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrackState {
  Vector9d mean = Vector9d::Zero();
  Matrix9d covariance = Matrix9d::Identity();
  double t = 0.0;
  /// Normalized innovation squared of the last update (NaN before any update).
  double nis = std::numeric_limits<double>::quiet_NaN();
};

/// Selects (x, y, z) from the 9-element state.
Eigen::Matrix<double, 3, 9> position_selector();

TrackState kf_predict(const TrackState& track, const ModeModel& model);

struct Innovation {
  Eigen::Vector3d residual;
  Eigen::Matrix3d covariance;
  double nis = 0.0;
  double log_likelihood = 0.0;
};

/// Innovation of a predicted track against a measurement. Throws
/// NumericalFailure when the innovation covariance is not positive definite.
Innovation innovation(const TrackState& predicted, const CartesianMeasurement& z);

/// Joseph-form update of a predicted track; the covariance is re-symmetrized.
TrackState kf_update(const TrackState& predicted, const CartesianMeasurement& z);

/// Predict one model period, then update. Throws std::invalid_argument when
/// the measurement is not exactly one period ahead of the track.
TrackState kf_step(const TrackState& track, const ModeModel& model, const CartesianMeasurement& z);

/// Process-noise intensities of the tracker bank: CA jerk, CV acceleration
/// and the turning modes.
inline constexpr double kTrackerManeuverIntensity = 0.1;
inline constexpr double kTrackerQuietIntensity = 0.001;
inline constexpr double kTrackerTurnIntensity = 0.01;
/// Self-transition probability of the tracker's Markov chain.
inline constexpr double kTrackerStay = 0.99;

struct ImmBank {
  std::vector<ModeModel> modes;
  Eigen::MatrixXd transition;  // row-stochastic Markov matrix over modes

  void validate() const;
  /// {CV, CA, HCT(+w), HCT(-w)} in 2D or {CV, CA, 3DCT(+w), 3DCT(-w)} in 3D,
  /// self-transition `stay`, the remainder spread uniformly. The CA mode uses
  /// `maneuver_intensity`.
  static ImmBank standard(int dim, double period, double bank_rate = 0.2, double stay = kTrackerStay,
                          double maneuver_intensity = kTrackerManeuverIntensity);
  static Eigen::MatrixXd markov(std::size_t n, double stay);
};

struct IMMState {
  std::vector<TrackState> per_mode;
  Eigen::VectorXd mode_probabilities;
  ImmBank bank;
  double t = 0.0;
  /// Set when every mode likelihood underflowed on the last step.
  bool degenerate_step = false;
};

IMMState imm_init(const TrackState& initial, const ImmBank& bank);
IMMState imm_init(const TrackState& initial, const ImmBank& bank, const Eigen::VectorXd& probabilities);

/// Mixing followed by per-mode prediction; mode probabilities become the
/// predicted (Markov-propagated) probabilities.
IMMState imm_predict(const IMMState& imm);
/// Full IMM cycle: mixing, per-mode Kalman step, likelihood update, normalization.
IMMState imm_step(const IMMState& imm, const CartesianMeasurement& z);
/// Applies the update half of imm_step to an already predicted state.
IMMState imm_update(const IMMState& predicted, const CartesianMeasurement& z);

struct CombinedEstimate {
  FlightState state;
  Matrix9d covariance = Matrix9d::Zero();
  double turn_rate = 0.0;
  Eigen::VectorXd mode_probabilities;
};

/// Probability-weighted mixture. In 2D the turn rate is the weighted signed
/// bank rate of the turning modes. The 3D turning modes are symmetric in the
/// sign of the rate, so in 3D it is the horizontal kinematic turn rate of the
/// mixture mean.
CombinedEstimate combined_estimate(const IMMState& imm, int dim = 2);

struct TrackerConfig {
  int dim = 2;
  double period = 0.1;
  ImmBank bank;
  double gate_probability = 0.997;
  double init_inflation = 10.0;
  double init_accel_sigma = 5.0;   // m/s^2, acceleration prior at initiation
  double max_init_speed = 60.0;    // m/s, plausibility bound for two-point initiation
  int max_coast = 20;              // consecutive misses before the track is dropped
  /// When no detection passes the chi-square gate, the nearest one within
  /// this distance (m) of the predicted position is still used, after the
  /// predicted velocity/acceleration variances are inflated. 0 disables.
  double maneuver_gate = 15.0;
  double maneuver_velocity_sigma = 10.0;  // m/s
  double maneuver_accel_sigma = 20.0;     // m/s^2

  static TrackerConfig standard(int dim, double period = 0.1);
  double gate_threshold() const;
};

struct TrackPoint {
  double t = 0.0;
  int segment = 0;
  bool updated = false;
  CombinedEstimate estimate;
};

/// Single-target track formation: two-point initiation, chi-square gating,
/// nearest-in-NIS association, prediction-only steps on misses.
std::vector<TrackPoint> run_tracker(const std::vector<RadarLook>& looks, const RadarConfig& radar,
                                    const TrackerConfig& cfg);

/// Per-step features: (v_x, v_y, a_x, a_y, w) in 2D, (v_x, v_y, v_z, a_x, a_y, a_z, w) in 3D.
int feature_count(int dim);
Eigen::VectorXd feature_row(const CombinedEstimate& est, int dim);

struct FeatureWindow {
  std::string trajectory_id;
  std::string label;
  bool intrusion = false;
  double start_time = 0.0;
  double end_time = 0.0;
  Eigen::MatrixXd features;  // W x F
};

inline int window_stride(int window, double overlap) {
  return std::max(1, static_cast<int>(std::lround(window * (1.0 - overlap))));
}

/// Windows at offsets 0, stride, 2*stride, ... within each contiguous track
/// segment. A segment shorter than W yields no windows.
std::vector<FeatureWindow> extract_features(const std::vector<TrackPoint>& track, int dim, int window,
                                            double overlap, const std::string& label,
                                            const std::string& trajectory_id, bool intrusion);

void write_track_csv(std::ostream& os, const std::vector<TrackPoint>& track);
std::vector<TrackPoint> read_track_csv(std::istream& is);

/// Window records: trajectory_id, label, intrusion_flag, start_time, then W*F
/// values row-major. The first line carries "#W,F".
void write_windows_csv(std::ostream& os, const std::vector<FeatureWindow>& windows);
std::vector<FeatureWindow> read_windows_csv(std::istream& is);

void to_json(nlohmann::json& j, const TrackerConfig& c);
void from_json(const nlohmann::json& j, TrackerConfig& c);

}  // namespace geointent
