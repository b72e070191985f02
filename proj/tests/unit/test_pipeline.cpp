#include "geointent/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace geointent;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(std::uint64_t seed = 5) {
  PipelineConfig c = PipelineConfig::standard(2, 4);
  c.seed = seed;
  c.windows = {50};
  c.n_splits = 3;
  c.training.epochs = 1;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geointent_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Shared small dataset, generated once.
const fs::path& dataset() {
  static const fs::path dir = [] {
    const fs::path d = fresh_dir("dataset");
    generate_dataset(small_config(), d);
    return d;
  }();
  return dir;
}

SplitTrainer oracle_trainer() {
  return [](const LabeledSet&, const LabeledSet& val, const std::vector<std::string>&, int, Rng&) {
    SplitOutcome o;
    o.predictions = val.labels;
    return o;
  };
}

SplitTrainer constant_trainer(int label) {
  return [label](const LabeledSet&, const LabeledSet& val, const std::vector<std::string>&, int, Rng&) {
    SplitOutcome o;
    o.predictions.assign(val.size(), label);
    return o;
  };
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("sample mean and standard deviation") {
  CHECK(mean_std({}) == std::pair<double, double>{0.0, 0.0});
  CHECK(mean_std({0.7}) == std::pair<double, double>{0.7, 0.0});
  const auto [m, s] = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(m == 5.0);
  CHECK(s == doctest::Approx(std::sqrt(32.0 / 7.0)));
}

TEST_CASE("stratified splits") {
  std::vector<std::pair<std::string, std::string>> ids;
  for (int i = 0; i < 10; ++i) ids.emplace_back("a" + std::to_string(i), "a");
  for (int i = 0; i < 5; ++i) ids.emplace_back("b" + std::to_string(i), "b");
  Rng r1(3), r2(3);
  const auto splits = split_dataset(ids, {"a", "b"}, 10, 0.2, r1);
  REQUIRE(splits.size() == 10);
  std::set<std::vector<std::string>> distinct;
  for (const auto& s : splits) {
    CHECK(s.train_ids.size() + s.validation_ids.size() == 15);
    std::set<std::string> all(s.train_ids.begin(), s.train_ids.end());
    for (const auto& v : s.validation_ids) CHECK(all.insert(v).second);
    CHECK(all.size() == 15);
    CHECK(std::count_if(s.validation_ids.begin(), s.validation_ids.end(), [](auto& x) { return x[0] == 'a'; }) == 2);
    CHECK(std::count_if(s.validation_ids.begin(), s.validation_ids.end(), [](auto& x) { return x[0] == 'b'; }) == 1);
    distinct.insert(s.validation_ids);
  }
  CHECK(distinct.size() > 1);
  const auto again = split_dataset(ids, {"a", "b"}, 10, 0.2, r2);
  CHECK(again[4].validation_ids == splits[4].validation_ids);

  Rng r3(1);
  try {
    split_dataset({{"x", "a"}, {"y", "a"}, {"z", "b"}}, {"a", "b"}, 1, 0.2, r3);
    FAIL("expected failure");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(split_dataset(ids, {"a", "b"}, 0, 0.2, r3), std::invalid_argument);
}

TEST_CASE("config JSON and comment-tolerant loading") {
  PipelineConfig c = small_config(42);
  c.counts["harmless"] = 9;
  c.training.loss.kind = LossKind::AFL;
  c.training.loss.gamma = Eigen::Vector3d(1, 1, 1);
  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "c.json");
    os << "// test config\n" << nlohmann::json(c).dump(2) << "\n";
  }
  const PipelineConfig back = load_config(dir / "c.json");
  CHECK(back.seed == 42);
  CHECK(back.counts.at("harmless") == 9);
  CHECK(back.windows == std::vector<int>{50});
  CHECK(back.training.loss.kind == LossKind::AFL);
  CHECK(back.radar.position == c.radar.position);
  CHECK(nlohmann::json(back) == nlohmann::json(c));

  const PipelineConfig sparse = nlohmann::json{{"dim", 3}, {"trajectories_per_intent", 2}}.get<PipelineConfig>();
  CHECK(sparse.environment.dim == 3);
  CHECK(sparse.counts.at("direct_attack") == 2);
  CHECK(sparse.tracker.dim == 3);
}

TEST_CASE("config validation") {
  PipelineConfig c = small_config();
  c.windows = {55};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.intents.push_back("unknown_intent");
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.validation_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(PipelineConfig::standard(4), std::invalid_argument);
  CHECK(small_config().architecture_for(150).sub_windows == 15);
  CHECK(PipelineConfig::standard(3).architecture_for(50).features == 7);
}

TEST_CASE("trajectory generation is deterministic") {
  const PipelineConfig c = small_config();
  const GeneratedTrajectory a = generate_trajectory(c, "direct_attack", 1);
  const GeneratedTrajectory b = generate_trajectory(c, "direct_attack", 1);
  const GeneratedTrajectory other = generate_trajectory(c, "direct_attack", 2);
  REQUIRE_FALSE(a.record.skipped);
  CHECK(nlohmann::json(a.record) == nlohmann::json(b.record));
  CHECK(a.record.seed != other.record.seed);
  CHECK(a.trajectory.size() == a.record.samples);
  CHECK(a.record.intrusion_time < kNeverIntrudes);
  CHECK(a.record.track_segments >= 1);
  CHECK(a.windows.at(50).size() == a.record.windows.at(50));
  std::ostringstream da, db;
  write_track_csv(da, a.track);
  write_track_csv(db, b.track);
  CHECK(da.str() == db.str());
}

TEST_CASE("dataset layout and manifest") {
  const fs::path& d = dataset();
  for (const char* f : {"config.json", "manifest.json", "trajectories.jsonl"}) CHECK(fs::exists(d / f));
  const DatasetManifest m = read_manifest(d);
  CHECK(m.records.size() == 12);
  CHECK(m.window_sizes == std::vector<int>{50});
  for (const auto* r : m.kept()) {
    CHECK(fs::exists(d / "detections" / (r->id + ".csv")));
    CHECK(fs::exists(d / "tracks" / (r->id + ".csv")));
    CHECK(fs::exists(d / "features" / "W50" / (r->id + ".csv")));
  }
  const auto windows = load_windows(d, m, 50);
  std::size_t expected = 0;
  for (const auto* r : m.kept()) expected += r->windows.at(50);
  CHECK(windows.size() == expected);
  for (const auto& w : windows) CHECK(w.intrusion == (m.intrusion_times().at(w.trajectory_id) != kNeverIntrudes));
  CHECK_THROWS(load_windows(d, m, 150));
  CHECK_THROWS(read_manifest(fresh_dir("missing")));
}

TEST_CASE("dataset generation is reproducible byte for byte") {
  const fs::path d2 = fresh_dir("dataset_again");
  generate_dataset(small_config(), d2);
  for (const char* f : {"manifest.json", "trajectories.jsonl", "config.json"}) {
    CHECK(slurp(dataset() / f) == slurp(d2 / f));
  }
  const DatasetManifest m = read_manifest(d2);
  for (const auto* r : m.kept()) {
    CHECK(slurp(dataset() / "features" / "W50" / (r->id + ".csv")) == slurp(d2 / "features" / "W50" / (r->id + ".csv")));
  }
}

TEST_CASE("experiment harness with stub trainers") {
  const PipelineConfig c = small_config();
  ExperimentOptions perfect;
  perfect.trainer = oracle_trainer();
  const ExperimentReport r = run_experiment(c, dataset(), 50, perfect);
  CHECK(r.split_accuracies == std::vector<double>(3, 1.0));
  CHECK(r.mean_accuracy == 1.0);
  CHECK(r.std_accuracy == 0.0);
  CHECK(r.expected_cost == 0.0);
  CHECK(r.confusion.sum() == doctest::Approx(static_cast<double>(
                                 std::accumulate(r.validation_windows_per_split.begin(),
                                                 r.validation_windows_per_split.end(), std::size_t{0}))));
  // Balanced validation: a constant guess is right for exactly one class in three.
  ExperimentOptions constant;
  constant.trainer = constant_trainer(1);
  const ExperimentReport k = run_experiment(c, dataset(), 50, constant);
  for (double a : k.split_accuracies) CHECK(a == doctest::Approx(1.0 / 3.0));
  CHECK(k.expected_cost == doctest::Approx(2.0 / 3.0));
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(k.confusion(i, 0) == 0.0);

  // Intrusion cost with unit weight on direct attack is its intrusion frequency.
  const DatasetManifest m = read_manifest(dataset());
  double n = 0, hit = 0;
  for (const auto* rec : m.kept()) {
    if (rec->intent != "direct_attack") continue;
    ++n;
    hit += rec->intrusion_time != kNeverIntrudes;
  }
  CHECK(r.intrusion_cost == hit / n);
  CHECK(experiment_splits(c, m).size() == 3);
}

TEST_CASE("experiment reports are reproducible and written to disk") {
  const PipelineConfig c = small_config();
  const fs::path out = fresh_dir("run");
  ExperimentOptions opt;
  opt.out_dir = out;
  opt.emit_plots = true;
  std::vector<ClassifierParams> params;
  opt.params_out = &params;
  const ExperimentReport a = run_experiment(c, dataset(), 50, opt);
  const ExperimentReport b = run_experiment(c, dataset(), 50);
  CHECK(a == b);
  CHECK(params.size() == 3);
  CHECK(fs::exists(out / "report_W50.json"));
  CHECK(fs::exists(out / "model_W50_split0.txt"));
  CHECK(fs::exists(out / "history_W50_split2.csv"));
  const auto j = nlohmann::json::parse(slurp(out / "report_W50.json"));
  CHECK(j.at("split_accuracies").size() == 3);
  CHECK(j.at("mean_accuracy").get<double>() == a.mean_accuracy);

  std::ifstream ms(out / "model_W50_split0.txt");
  const ClassifierParams p = read_params(ms);
  CHECK(p.values == params[0].values);
}

TEST_CASE("streaming inference") {
  const PipelineConfig c = small_config();
  const GeneratedTrajectory g = generate_trajectory(c, "direct_attack", 0);
  Rng rng(1);
  ClassifierParams p = ClassifierParams::init(c.architecture_for(50), rng);
  p.labels = c.intents;
  const auto series = infer_stream(p, g.looks, c, 50);
  CHECK(series.size() == g.windows.at(50).size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    CHECK(std::abs(series[i].posterior.sum() - 1.0) < 1e-12);
    CHECK(series[i].tau == doctest::Approx(g.windows.at(50)[i].end_time));
    if (i > 0) CHECK(series[i].tau > series[i - 1].tau);
  }
}

}  // TEST_SUITE
