#pragma once

#include "geointent/classifier.hpp"
#include "geointent/env_model.hpp"
#include "geointent/flight_dynamics.hpp"
#include "geointent/intent_library.hpp"
#include "geointent/motion_planner.hpp"
#include "geointent/radar_sim.hpp"
#include "geointent/tracking_imm.hpp"
#include "geointent/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geointent {

/// Everything needed to regenerate a dataset and rerun an experiment.
///
/// Lengths in `environment`, `library` and the planner step/radius/tolerance
/// are given at unit scale and multiplied by `geometry_scale`; speeds are not.
struct PipelineConfig {
  int dim = 2;
  double geometry_scale = 10.0;
  std::uint64_t seed = 1;

  Environment environment = Environment::example_2d();
  IntentLibrary library = builtin_library_2d();
  std::vector<std::string> intents;           // classes, in output-unit order
  std::map<std::string, int> counts;          // trajectories per intent
  int max_attempts = 3;                       // waypoint resamples after a planning failure

  PlannerParams planner;
  RadarConfig radar;                          // positioned for the scaled environment
  TrackerConfig tracker = TrackerConfig::standard(2);

  std::vector<int> windows = {50, 150};
  double overlap = 0.9;
  Architecture architecture;                  // features/sub_windows are derived per window
  TrainingConfig training;
  int n_splits = 10;
  double validation_fraction = 0.2;
  int threads = 1;

  /// Reference configuration for 2D or 3D with `per_intent` trajectories each.
  static PipelineConfig standard(int dim, int per_intent = 20);

  Environment scaled_environment() const { return environment.scaled(geometry_scale); }
  IntentLibrary scaled_library() const { return library.scaled(geometry_scale); }
  PlannerParams scaled_planner() const;
  Architecture architecture_for(int window) const;
  int stride(int window) const { return window_stride(window, overlap); }
  void validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Missing keys keep the values of PipelineConfig::standard(dim).
void from_json(const nlohmann::json& j, PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

/// One generated trajectory (or a skipped attempt) in the dataset manifest.
struct TrajectoryRecord {
  std::string id;
  std::string intent;
  int index = 0;
  std::uint64_t seed = 0;
  bool skipped = false;
  std::string skip_reason;
  std::size_t cros_index = 0;
  std::vector<std::vector<double>> waypoints;
  double speed = 0.0;
  double intrusion_time = kNeverIntrudes;
  bool well_defined = false;
  std::size_t samples = 0;
  std::size_t detections = 0;
  std::size_t track_segments = 0;
  std::map<int, std::size_t> windows;  // W -> window count
};

struct DatasetManifest {
  std::vector<TrajectoryRecord> records;
  std::vector<std::string> intents;
  std::vector<int> window_sizes;

  std::vector<const TrajectoryRecord*> kept() const;
  std::map<std::string, double> intrusion_times() const;
};

void to_json(nlohmann::json& j, const TrajectoryRecord& r);
void from_json(const nlohmann::json& j, TrajectoryRecord& r);
void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

/// Per-trajectory artifacts held in memory.
struct GeneratedTrajectory {
  TrajectoryRecord record;
  Trajectory trajectory;
  std::vector<RadarLook> looks;
  std::vector<TrackPoint> track;
  std::map<int, std::vector<FeatureWindow>> windows;
};

/// Runs one trajectory end to end from its derived seed. Planning failures
/// after `max_attempts` produce a record with skipped = true.
GeneratedTrajectory generate_trajectory(const PipelineConfig& cfg, const std::string& intent, int index);

/// Writes config.json, manifest.json, trajectories.jsonl, detections/<id>.csv,
/// tracks/<id>.csv and features/W<w>/<id>.csv under `out_dir`. Throws if an
/// intent yields no trajectory.
DatasetManifest generate_dataset(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

DatasetManifest read_manifest(const std::filesystem::path& dataset_dir);
/// All windows of size `window` for the kept trajectories.
std::vector<FeatureWindow> load_windows(const std::filesystem::path& dataset_dir, const DatasetManifest& manifest,
                                        int window);

struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
};

/// Stratified random splits at trajectory granularity. Throws naming the
/// class when it has fewer than two trajectories.
std::vector<Split> split_dataset(const std::vector<std::pair<std::string, std::string>>& id_and_label,
                                 const std::vector<std::string>& labels, int n_splits, double validation_fraction,
                                 Rng& rng);

/// The splits run_experiment uses for this config and dataset.
std::vector<Split> experiment_splits(const PipelineConfig& cfg, const DatasetManifest& manifest);

struct SplitOutcome {
  std::vector<int> predictions;        // one per validation window
  std::vector<EpochRecord> history;
  std::optional<ClassifierParams> params;
};

/// Trains on `train` and predicts `validation`; replaceable for harness tests.
using SplitTrainer = std::function<SplitOutcome(const LabeledSet& train, const LabeledSet& validation,
                                                const std::vector<std::string>& labels, int split, Rng& rng)>;

SplitTrainer default_trainer(const PipelineConfig& cfg, int window);

struct ExperimentReport {
  int window = 0;
  std::vector<std::string> labels;
  std::vector<double> split_accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation, 0 for one split
  Eigen::MatrixXd confusion;  // summed over splits, [true][predicted]
  double expected_cost = 0.0;
  double intrusion_cost = 0.0;
  std::vector<std::size_t> train_windows_per_split;
  std::vector<std::size_t> validation_windows_per_split;
  double runtime_seconds = 0.0;  // excluded from equality

  friend bool operator==(const ExperimentReport& a, const ExperimentReport& b);
};

void to_json(nlohmann::json& j, const ExperimentReport& r);

struct ExperimentOptions {
  SplitTrainer trainer;  // defaults to default_trainer(cfg, window)
  std::optional<std::filesystem::path> out_dir;
  bool emit_plots = false;
  /// Keeps the parameters of every split (in split order).
  std::vector<ClassifierParams>* params_out = nullptr;
};

/// Balances classes, trains one classifier per split, and aggregates the
/// validation accuracies and cost metrics.
ExperimentReport run_experiment(const PipelineConfig& cfg, const std::filesystem::path& dataset_dir, int window,
                                const ExperimentOptions& options = {});

/// Tracks a detection stream and classifies each completed window.
std::vector<PosteriorPoint> infer_stream(const ClassifierParams& params, const std::vector<RadarLook>& looks,
                                         const PipelineConfig& cfg, int window);

/// Sample mean and (n-1) standard deviation; std is 0 for fewer than two values.
std::pair<double, double> mean_std(const std::vector<double>& values);

}  // namespace geointent
