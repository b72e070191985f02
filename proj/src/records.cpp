#include "geointent/pipeline.hpp"

#include <cmath>
#include <fstream>

namespace geointent {

namespace {

nlohmann::json time_or_inf(double t) {
  if (std::isinf(t)) return "inf";
  return t;
}

double time_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kNeverIntrudes;
    throw std::invalid_argument("bad time value " + j.dump());
  }
  return j.get<double>();
}

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [k, v] : c.counts) counts[k] = v;
  j = nlohmann::json{{"dim", c.dim},
                     {"geometry_scale", c.geometry_scale},
                     {"seed", c.seed},
                     {"environment", c.environment},
                     {"library", c.library},
                     {"intents", c.intents},
                     {"counts", counts},
                     {"max_attempts", c.max_attempts},
                     {"planner", c.planner},
                     {"radar", c.radar},
                     {"tracker", c.tracker},
                     {"windows", c.windows},
                     {"overlap", c.overlap},
                     {"architecture", c.architecture},
                     {"training", c.training},
                     {"n_splits", c.n_splits},
                     {"validation_fraction", c.validation_fraction},
                     {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  const int dim = j.value("dim", 2);
  c = PipelineConfig::standard(dim, j.value("trajectories_per_intent", 20));
  c.geometry_scale = j.value("geometry_scale", c.geometry_scale);
  c.seed = j.value("seed", c.seed);
  if (j.contains("environment")) c.environment = j.at("environment").get<Environment>();
  if (j.contains("library")) {
    c.library = j.at("library").get<IntentLibrary>();
  } else if (j.contains("harmless_legs")) {
    const int legs = j.at("harmless_legs").get<int>();
    c.library = dim == 2 ? builtin_library_2d(legs) : builtin_library_3d(legs);
  }
  if (j.contains("intents")) {
    c.intents = j.at("intents").get<std::vector<std::string>>();
    const int per = j.value("trajectories_per_intent", 20);
    c.counts.clear();
    for (const auto& i : c.intents) c.counts[i] = per;
  }
  if (j.contains("counts")) {
    for (const auto& [k, v] : j.at("counts").items()) c.counts[k] = v.get<int>();
  }
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  if (j.contains("planner")) c.planner = j.at("planner").get<PlannerParams>();
  c.radar = RadarConfig::for_environment(c.scaled_environment());
  if (j.contains("radar")) from_json(j.at("radar"), c.radar);
  if (j.contains("tracker")) from_json(j.at("tracker"), c.tracker);
  c.windows = j.value("windows", c.windows);
  c.overlap = j.value("overlap", c.overlap);
  if (j.contains("architecture")) c.architecture = j.at("architecture").get<Architecture>();
  if (j.contains("training")) c.training = j.at("training").get<TrainingConfig>();
  c.n_splits = j.value("n_splits", c.n_splits);
  c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
  c.threads = j.value("threads", c.threads);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  PipelineConfig c = nlohmann::json::parse(is, nullptr, true, true).get<PipelineConfig>();
  c.validate();
  return c;
}

void to_json(nlohmann::json& j, const TrajectoryRecord& r) {
  nlohmann::json windows = nlohmann::json::object();
  for (const auto& [w, n] : r.windows) windows[std::to_string(w)] = n;
  j = nlohmann::json{{"id", r.id},
                     {"intent", r.intent},
                     {"index", r.index},
                     {"seed", r.seed},
                     {"skipped", r.skipped},
                     {"skip_reason", r.skip_reason},
                     {"cros_index", r.cros_index},
                     {"waypoints", r.waypoints},
                     {"speed", r.speed},
                     {"intrusion_time", time_or_inf(r.intrusion_time)},
                     {"well_defined", r.well_defined},
                     {"samples", r.samples},
                     {"detections", r.detections},
                     {"track_segments", r.track_segments},
                     {"windows", windows}};
}

void from_json(const nlohmann::json& j, TrajectoryRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.intent = j.at("intent").get<std::string>();
  r.index = j.value("index", 0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.skipped = j.value("skipped", false);
  r.skip_reason = j.value("skip_reason", std::string());
  r.cros_index = j.value("cros_index", std::size_t{0});
  r.waypoints = j.value("waypoints", std::vector<std::vector<double>>{});
  r.speed = j.value("speed", 0.0);
  r.intrusion_time = j.contains("intrusion_time") ? time_from_json(j.at("intrusion_time")) : kNeverIntrudes;
  r.well_defined = j.value("well_defined", false);
  r.samples = j.value("samples", std::size_t{0});
  r.detections = j.value("detections", std::size_t{0});
  r.track_segments = j.value("track_segments", std::size_t{0});
  r.windows.clear();
  if (j.contains("windows")) {
    for (const auto& [k, v] : j.at("windows").items()) r.windows[std::stoi(k)] = v.get<std::size_t>();
  }
}

void to_json(nlohmann::json& j, const DatasetManifest& m) {
  j = nlohmann::json{{"intents", m.intents}, {"window_sizes", m.window_sizes}, {"trajectories", m.records}};
}

void from_json(const nlohmann::json& j, DatasetManifest& m) {
  m.intents = j.at("intents").get<std::vector<std::string>>();
  m.window_sizes = j.at("window_sizes").get<std::vector<int>>();
  m.records = j.at("trajectories").get<std::vector<TrajectoryRecord>>();
}

void to_json(nlohmann::json& j, const ExperimentReport& r) {
  j = nlohmann::json{{"window", r.window},
                     {"labels", r.labels},
                     {"split_accuracies", r.split_accuracies},
                     {"mean_accuracy", r.mean_accuracy},
                     {"std_accuracy", r.std_accuracy},
                     {"confusion", rows_of(r.confusion)},
                     {"expected_misclassification_cost", r.expected_cost},
                     {"intrusion_cost", r.intrusion_cost},
                     {"train_windows_per_split", r.train_windows_per_split},
                     {"validation_windows_per_split", r.validation_windows_per_split},
                     {"runtime", {{"seconds", r.runtime_seconds}}}};
}

}  // namespace geointent
