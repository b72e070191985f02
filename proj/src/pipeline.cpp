#include "geointent/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace geointent {

namespace fs = std::filesystem;

PipelineConfig PipelineConfig::standard(int dim, int per_intent) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimensionality must be 2 or 3");
  PipelineConfig c;
  c.dim = dim;
  c.environment = dim == 2 ? Environment::example_2d() : Environment::default_3d();
  c.library = dim == 2 ? builtin_library_2d() : builtin_library_3d();
  c.intents = {intents::kDirectAttack, intents::kHarmless, intents::kSurveillance};
  for (const auto& i : c.intents) c.counts[i] = per_intent;
  c.radar = RadarConfig::for_environment(c.scaled_environment());
  c.tracker = TrackerConfig::standard(dim, 0.1);
  return c;
}

PlannerParams PipelineConfig::scaled_planner() const {
  PlannerParams p = planner;
  p.step_size *= geometry_scale;
  p.rewire_radius *= geometry_scale;
  p.goal_tolerance *= geometry_scale;
  return p;
}

Architecture PipelineConfig::architecture_for(int window) const {
  Architecture a = architecture;
  a.features = feature_count(dim);
  a.classes = static_cast<int>(intents.size());
  if (window % a.sub_window != 0) {
    throw std::invalid_argument("window " + std::to_string(window) + " is not a multiple of the sub-window length");
  }
  a.sub_windows = window / a.sub_window;
  a.validate();
  return a;
}

void PipelineConfig::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimensionality must be 2 or 3");
  if (!(geometry_scale > 0.0)) throw std::invalid_argument("geometry_scale must be > 0");
  if (environment.dim != dim) throw std::invalid_argument("environment dimensionality differs from config");
  if (intents.size() < 2) throw std::invalid_argument("need at least two intents");
  for (const auto& i : intents) {
    if (!library.has_intent(i)) throw std::invalid_argument("intent '" + i + "' is not in the library");
    const auto it = counts.find(i);
    if (it == counts.end() || it->second <= 0) throw std::invalid_argument("count for intent '" + i + "' must be > 0");
    if (std::abs(library.intent(i).motion.sample_rate * tracker.period - 1.0) > 1e-9) {
      throw std::invalid_argument("intent '" + i + "' sample rate differs from the tracker period");
    }
  }
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (windows.empty()) throw std::invalid_argument("need at least one window size");
  for (int w : windows) architecture_for(w);
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must be in [0,1)");
  if (n_splits < 1) throw std::invalid_argument("n_splits must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must be in (0,1)");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  scaled_planner().validate();
  radar.validate();
  tracker.bank.validate();
  training.validate();
  training.loss.validate(static_cast<int>(intents.size()));
  const auto report = validate_library(scaled_library().subset(intents), scaled_environment());
  if (!report.ok()) throw std::invalid_argument("intent library invalid: " + report.violations.front());
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception
// is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<int>(threads, static_cast<int>(n)); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string trajectory_id(const std::string& intent, int index) {
  std::ostringstream os;
  os << intent << '_' << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

std::uint64_t trajectory_seed(const PipelineConfig& cfg, const std::string& intent, int index) {
  const auto it = std::find(cfg.intents.begin(), cfg.intents.end(), intent);
  if (it == cfg.intents.end()) throw std::invalid_argument("intent '" + intent + "' is not configured");
  const auto slot = static_cast<std::uint64_t>(it - cfg.intents.begin());
  return derive_seed(cfg.seed, slot * 1000000ULL + static_cast<std::uint64_t>(index));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

std::string window_dir(int w) { return "W" + std::to_string(w); }

}  // namespace

GeneratedTrajectory generate_trajectory(const PipelineConfig& cfg, const std::string& intent_id, int index) {
  GeneratedTrajectory g;
  TrajectoryRecord& rec = g.record;
  rec.id = trajectory_id(intent_id, index);
  rec.intent = intent_id;
  rec.index = index;
  rec.seed = trajectory_seed(cfg, intent_id, index);
  Rng rng(rec.seed);

  const Environment env = cfg.scaled_environment();
  const IntentLibrary lib = cfg.scaled_library();
  const Intent& intent = lib.intent(intent_id);
  const PlannerParams planner = cfg.scaled_planner();

  WaypointSequence wps;
  Path path;
  bool planned = false;
  for (int attempt = 0; attempt < cfg.max_attempts && !planned; ++attempt) {
    wps = sample_waypoints(lib, intent, env, rng);
    try {
      path = chain_waypoints(wps, env, planner, rng);
      planned = true;
    } catch (const PlanningFailure& e) {
      rec.skip_reason = e.what();
    }
  }
  if (!planned) {
    rec.skipped = true;
    return g;
  }
  rec.skip_reason.clear();
  rec.cros_index = wps.cros_index;
  for (const auto& w : wps.waypoints) rec.waypoints.emplace_back(w.data(), w.data() + w.size());

  rec.speed = uniform(rng, intent.motion.speed_min, intent.motion.speed_max);
  const TimedPositions timed = time_parameterize(path, rec.speed, intent.motion.sample_rate, 3);
  g.trajectory = synthesize_trajectory(timed, intent_id, env);
  g.trajectory.id = rec.id;
  g.trajectory.environment_id = env.id;
  rec.intrusion_time = g.trajectory.intrusion_time;
  rec.well_defined = check_well_defined(g.trajectory, wps, intent.motion.epsilon);
  rec.samples = g.trajectory.size();

  g.looks = simulate_looks(cfg.radar, g.trajectory, rng);
  for (const auto& l : g.looks) rec.detections += l.detections.size();
  g.track = run_tracker(g.looks, cfg.radar, cfg.tracker);
  std::set<int> segments;
  for (const auto& p : g.track) segments.insert(p.segment);
  rec.track_segments = segments.size();
  for (int w : cfg.windows) {
    g.windows[w] = extract_features(g.track, cfg.dim, w, cfg.overlap, intent_id, rec.id, g.trajectory.intrudes());
    rec.windows[w] = g.windows[w].size();
  }
  return g;
}

std::vector<const TrajectoryRecord*> DatasetManifest::kept() const {
  std::vector<const TrajectoryRecord*> out;
  for (const auto& r : records) {
    if (!r.skipped) out.push_back(&r);
  }
  return out;
}

std::map<std::string, double> DatasetManifest::intrusion_times() const {
  std::map<std::string, double> out;
  for (const auto* r : kept()) out[r->id] = r->intrusion_time;
  return out;
}

DatasetManifest generate_dataset(const PipelineConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir / "detections");
  fs::create_directories(out_dir / "tracks");
  for (int w : cfg.windows) fs::create_directories(out_dir / "features" / window_dir(w));
  write_file(out_dir / "config.json", nlohmann::json(cfg).dump(2) + "\n");

  std::vector<std::pair<std::string, int>> tasks;
  for (const auto& intent : cfg.intents) {
    for (int k = 0; k < cfg.counts.at(intent); ++k) tasks.emplace_back(intent, k);
  }
  DatasetManifest manifest;
  manifest.intents = cfg.intents;
  manifest.window_sizes = cfg.windows;
  manifest.records.resize(tasks.size());
  std::vector<std::string> trajectory_lines(tasks.size());

  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    GeneratedTrajectory g = generate_trajectory(cfg, tasks[i].first, tasks[i].second);
    manifest.records[i] = g.record;
    if (g.record.skipped) return;
    const std::string file = g.record.id + ".csv";
    std::ostringstream det, trk;
    write_detections_csv(det, g.looks);
    write_file(out_dir / "detections" / file, det.str());
    write_track_csv(trk, g.track);
    write_file(out_dir / "tracks" / file, trk.str());
    for (const auto& [w, windows] : g.windows) {
      std::ostringstream os;
      write_windows_csv(os, windows);
      write_file(out_dir / "features" / window_dir(w) / file, os.str());
    }
    trajectory_lines[i] = trajectory_to_json(g.trajectory).dump() + "\n";
  });

  std::string jsonl;
  for (const auto& l : trajectory_lines) jsonl += l;
  write_file(out_dir / "trajectories.jsonl", jsonl);
  write_file(out_dir / "manifest.json", nlohmann::json(manifest).dump(2) + "\n");

  for (const auto& r : manifest.records) {
    if (r.skipped) std::cerr << "warning: skipped " << r.id << ": " << r.skip_reason << "\n";
  }
  for (const auto& intent : cfg.intents) {
    const bool any = std::any_of(manifest.records.begin(), manifest.records.end(),
                                 [&](const TrajectoryRecord& r) { return r.intent == intent && !r.skipped; });
    if (!any) throw std::runtime_error("intent '" + intent + "' produced no trajectories");
  }
  return manifest;
}

DatasetManifest read_manifest(const fs::path& dataset_dir) {
  std::ifstream is(dataset_dir / "manifest.json");
  if (!is) throw std::runtime_error("no manifest.json in " + dataset_dir.string());
  return nlohmann::json::parse(is).get<DatasetManifest>();
}

std::vector<FeatureWindow> load_windows(const fs::path& dataset_dir, const DatasetManifest& manifest, int window) {
  std::vector<FeatureWindow> out;
  for (const auto* r : manifest.kept()) {
    const fs::path p = dataset_dir / "features" / window_dir(window) / (r->id + ".csv");
    std::ifstream is(p);
    if (!is) throw std::runtime_error("missing feature file " + p.string());
    auto w = read_windows_csv(is);
    std::move(w.begin(), w.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<Split> split_dataset(const std::vector<std::pair<std::string, std::string>>& id_and_label,
                                 const std::vector<std::string>& labels, int n_splits, double validation_fraction,
                                 Rng& rng) {
  if (n_splits < 1) throw std::invalid_argument("n_splits must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must be in (0,1)");
  }
  std::map<std::string, std::vector<std::string>> by_label;
  for (const auto& l : labels) by_label[l];
  for (const auto& [id, label] : id_and_label) {
    auto it = by_label.find(label);
    if (it == by_label.end()) throw std::invalid_argument("unknown label '" + label + "'");
    it->second.push_back(id);
  }
  for (const auto& l : labels) {
    if (by_label[l].size() < 2) throw std::invalid_argument("class '" + l + "' has too few trajectories to split");
  }
  std::vector<Split> splits;
  for (int s = 0; s < n_splits; ++s) {
    Split split;
    for (const auto& l : labels) {
      std::vector<std::string> ids = by_label[l];
      for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[static_cast<std::size_t>(rng() % i)]);
      const auto n = ids.size();
      const auto n_val = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(validation_fraction * static_cast<double>(n))), 1, n - 1);
      split.validation_ids.insert(split.validation_ids.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
      split.train_ids.insert(split.train_ids.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_val), ids.end());
    }
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.validation_ids.begin(), split.validation_ids.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

SplitTrainer default_trainer(const PipelineConfig& cfg, int window) {
  const Architecture arch = cfg.architecture_for(window);
  const TrainingConfig training = cfg.training;
  return [arch, training](const LabeledSet& train_set, const LabeledSet& validation,
                          const std::vector<std::string>& labels, int split, Rng& rng) {
    SplitOutcome out;
    try {
      TrainResult r = train(train_set, validation, labels, arch, training, rng);
      out.predictions = predict(r.params, validation.windows);
      out.history = std::move(r.history);
      out.params = std::move(r.params);
    } catch (const TrainingDivergence& e) {
      throw std::runtime_error("split " + std::to_string(split) + ": " + e.what());
    }
    return out;
  };
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
  return a.window == b.window && a.labels == b.labels && a.split_accuracies == b.split_accuracies &&
         a.mean_accuracy == b.mean_accuracy && a.std_accuracy == b.std_accuracy && a.confusion == b.confusion &&
         a.expected_cost == b.expected_cost && a.intrusion_cost == b.intrusion_cost &&
         a.train_windows_per_split == b.train_windows_per_split &&
         a.validation_windows_per_split == b.validation_windows_per_split;
}

namespace {

Eigen::MatrixXd default_cost_matrix(int k) {
  return Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k);
}

Eigen::VectorXd default_intrusion_costs(const std::vector<std::string>& labels) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == intents::kDirectAttack) c[static_cast<Eigen::Index>(i)] = 1.0;
  }
  return c;
}

// Per-step feature stream of each track segment.
struct SegmentStream {
  Eigen::MatrixXd features;
  std::vector<double> times;
};

std::vector<SegmentStream> segment_streams(const std::vector<TrackPoint>& track, int dim) {
  std::vector<SegmentStream> out;
  std::size_t start = 0;
  while (start < track.size()) {
    std::size_t end = start;
    while (end < track.size() && track[end].segment == track[start].segment) ++end;
    SegmentStream s;
    s.features.resize(static_cast<Eigen::Index>(end - start), feature_count(dim));
    for (std::size_t k = start; k < end; ++k) {
      s.features.row(static_cast<Eigen::Index>(k - start)) = feature_row(track[k].estimate, dim).transpose();
      s.times.push_back(track[k].t);
    }
    out.push_back(std::move(s));
    start = end;
  }
  return out;
}

std::vector<PosteriorPoint> posterior_over_track(const ClassifierParams& params, const std::vector<TrackPoint>& track,
                                                 int dim, int window, int stride) {
  std::vector<PosteriorPoint> out;
  for (const auto& s : segment_streams(track, dim)) {
    auto part = posterior_evolution(params, s.features, s.times, window, stride);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace

namespace {

std::vector<std::pair<std::string, std::string>> labeled_ids(const DatasetManifest& manifest,
                                                             const std::vector<std::string>& labels) {
  std::vector<std::pair<std::string, std::string>> ids;
  for (const auto* r : manifest.kept()) {
    if (std::find(labels.begin(), labels.end(), r->intent) != labels.end()) ids.emplace_back(r->id, r->intent);
  }
  return ids;
}

}  // namespace

std::vector<Split> experiment_splits(const PipelineConfig& cfg, const DatasetManifest& manifest) {
  Rng split_rng(derive_seed(cfg.seed, 0x5B117ULL));
  return split_dataset(labeled_ids(manifest, cfg.intents), cfg.intents, cfg.n_splits, cfg.validation_fraction,
                       split_rng);
}

ExperimentReport run_experiment(const PipelineConfig& cfg, const fs::path& dataset_dir, int window,
                                const ExperimentOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const DatasetManifest manifest = read_manifest(dataset_dir);
  const std::vector<std::string>& labels = cfg.intents;
  const int k = static_cast<int>(labels.size());
  const std::vector<FeatureWindow> windows = load_windows(dataset_dir, manifest, window);
  const auto intrusion = manifest.intrusion_times();

  const auto ids = labeled_ids(manifest, labels);
  const auto splits = experiment_splits(cfg, manifest);
  const SplitTrainer trainer = options.trainer ? options.trainer : default_trainer(cfg, window);

  struct SplitResult {
    double accuracy = 0.0;
    Eigen::MatrixXd confusion;
    std::size_t n_train = 0, n_val = 0;
    SplitOutcome outcome;
    std::vector<std::string> validation_ids;
  };
  std::vector<SplitResult> results(splits.size());
  parallel_for(splits.size(), cfg.threads, [&](std::size_t s) {
    const std::set<std::string> train_ids(splits[s].train_ids.begin(), splits[s].train_ids.end());
    const std::set<std::string> val_ids(splits[s].validation_ids.begin(), splits[s].validation_ids.end());
    std::vector<const FeatureWindow*> tr, va;
    for (const auto& w : windows) {
      if (train_ids.count(w.trajectory_id)) tr.push_back(&w);
      else if (val_ids.count(w.trajectory_id)) va.push_back(&w);
    }
    Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(window)), s));
    const LabeledSet train_set = balance_classes(make_labeled_set(tr, labels, intrusion), k, rng);
    const LabeledSet val_set = balance_classes(make_labeled_set(va, labels, intrusion), k, rng);
    SplitResult& res = results[s];
    res.outcome = trainer(train_set, val_set, labels, static_cast<int>(s), rng);
    if (res.outcome.predictions.size() != val_set.size()) {
      throw std::runtime_error("trainer returned the wrong number of predictions");
    }
    res.confusion = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < val_set.size(); ++i) res.confusion(val_set.labels[i], res.outcome.predictions[i]) += 1.0;
    res.accuracy = val_set.size() > 0 ? res.confusion.trace() / static_cast<double>(val_set.size()) : 0.0;
    res.n_train = train_set.size();
    res.n_val = val_set.size();
    res.validation_ids = splits[s].validation_ids;
  });

  ExperimentReport report;
  report.window = window;
  report.labels = labels;
  report.confusion = Eigen::MatrixXd::Zero(k, k);
  for (const auto& r : results) {
    report.split_accuracies.push_back(r.accuracy);
    report.confusion += r.confusion;
    report.train_windows_per_split.push_back(r.n_train);
    report.validation_windows_per_split.push_back(r.n_val);
  }
  std::tie(report.mean_accuracy, report.std_accuracy) = mean_std(report.split_accuracies);
  const Eigen::MatrixXd cost = cfg.training.loss.cost_matrix.size() > 0 ? cfg.training.loss.cost_matrix
                                                                         : default_cost_matrix(k);
  report.expected_cost = expected_misclassification_cost(report.confusion, cost);
  std::vector<IntrusionRecord> intrusions;
  for (const auto& [id, label] : ids) {
    const auto idx = std::find(labels.begin(), labels.end(), label) - labels.begin();
    intrusions.push_back({static_cast<int>(idx), intrusion.at(id) != kNeverIntrudes});
  }
  const Eigen::VectorXd int_costs = cfg.training.loss.intrusion_costs.size() == k
                                        ? cfg.training.loss.intrusion_costs
                                        : default_intrusion_costs(labels);
  report.intrusion_cost = intrusion_cost_metric(intrusions, int_costs);

  if (options.params_out) {
    options.params_out->clear();
    for (const auto& r : results) {
      if (r.outcome.params) options.params_out->push_back(*r.outcome.params);
    }
  }

  if (options.out_dir) {
    const fs::path out = *options.out_dir;
    fs::create_directories(out);
    const std::string tag = "W" + std::to_string(window);
    for (std::size_t s = 0; s < results.size(); ++s) {
      const auto& r = results[s];
      const std::string split_tag = tag + "_split" + std::to_string(s);
      if (r.outcome.params) {
        std::ofstream os(out / ("model_" + split_tag + ".txt"), std::ios::binary);
        write_params(os, *r.outcome.params);
      }
      if (options.emit_plots && !r.outcome.history.empty()) {
        std::ofstream os(out / ("history_" + split_tag + ".csv"), std::ios::binary);
        write_history_csv(os, r.outcome.history);
      }
    }
    // Posterior evolution for the first held-out trajectory of each class in split 0.
    if (options.emit_plots && !results.empty() && results.front().outcome.params) {
      const auto& params = *results.front().outcome.params;
      for (const auto& label : labels) {
        for (const auto& id : results.front().validation_ids) {
          if (id.rfind(label + "_", 0) != 0) continue;
          std::ifstream is(dataset_dir / "tracks" / (id + ".csv"));
          if (!is) break;
          const auto track = read_track_csv(is);
          std::ofstream os(out / ("posterior_" + tag + "_" + id + ".csv"), std::ios::binary);
          write_posterior_csv(os, posterior_over_track(params, track, cfg.dim, window, cfg.stride(window)), labels);
          break;
        }
      }
    }
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (options.out_dir) {
    std::ofstream os(*options.out_dir / ("report_W" + std::to_string(window) + ".json"), std::ios::binary);
    os << nlohmann::json(report).dump(2) << '\n';
  }
  return report;
}

std::vector<PosteriorPoint> infer_stream(const ClassifierParams& params, const std::vector<RadarLook>& looks,
                                         const PipelineConfig& cfg, int window) {
  const auto track = run_tracker(looks, cfg.radar, cfg.tracker);
  auto out = posterior_over_track(params, track, cfg.dim, window, cfg.stride(window));
  if (out.empty()) std::cerr << "warning: stream shorter than one window of " << window << " steps\n";
  return out;
}

}  // namespace geointent
