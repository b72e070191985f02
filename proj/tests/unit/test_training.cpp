#include "geointent/training.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

using namespace geointent;

namespace {

Architecture tiny() {
  Architecture a;
  a.features = 2;
  a.sub_window = 6;
  a.sub_windows = 2;
  a.conv_filters = 6;
  a.kernel = 2;
  a.hidden = 6;
  a.dense = 8;
  a.classes = 3;
  a.dropout = 0.1;
  return a;
}

// Class c drifts along a class-specific direction.
std::vector<FeatureWindow> toy_windows(int per_class, Rng& rng) {
  const std::vector<std::string> names{"a", "b", "c"};
  std::vector<FeatureWindow> out;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      FeatureWindow w;
      w.label = names[static_cast<std::size_t>(c)];
      w.trajectory_id = w.label + std::to_string(i);
      w.end_time = 1.0 + i;
      w.features.resize(12, 2);
      for (int r = 0; r < 12; ++r) {
        w.features(r, 0) = (c == 0 ? 1.0 : c == 1 ? -1.0 : 0.0) * r * 0.3 + normal(rng, 0.5);
        w.features(r, 1) = (c == 2 ? 1.0 : 0.0) * r * 0.3 + normal(rng, 0.5);
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<const FeatureWindow*> ptrs(const std::vector<FeatureWindow>& w) {
  std::vector<const FeatureWindow*> p;
  for (const auto& x : w) p.push_back(&x);
  return p;
}

const std::vector<std::string> kLabels{"a", "b", "c"};

}  // namespace

TEST_SUITE("training") {

TEST_CASE("labeled sets") {
  Rng rng(1);
  const auto w = toy_windows(3, rng);
  const LabeledSet s = make_labeled_set(ptrs(w), kLabels, {{"a1", 4.0}});
  CHECK(s.size() == 9);
  CHECK(s.labels[4] == 1);
  CHECK(s.intrusion_times[1] == 4.0);
  CHECK(std::isinf(s.intrusion_times[0]));
  CHECK_THROWS_AS(make_labeled_set(ptrs(w), {"a", "b"}), std::invalid_argument);
}

TEST_CASE("balancing downsamples to the smallest class") {
  Rng rng(2);
  auto w = toy_windows(10, rng);
  w.erase(w.begin() + 12, w.begin() + 16);  // class b keeps 6
  const LabeledSet s = make_labeled_set(ptrs(w), kLabels);
  Rng r1(5), r2(5);
  const LabeledSet b = balance_classes(s, 3, r1);
  CHECK(b.size() == 18);
  for (int c = 0; c < 3; ++c) CHECK(std::count(b.labels.begin(), b.labels.end(), c) == 6);
  std::set<const FeatureWindow*> unique(b.windows.begin(), b.windows.end());
  CHECK(unique.size() == 18);
  CHECK(balance_classes(s, 3, r2).windows == b.windows);
}

TEST_CASE("training learns a separable problem and is reproducible") {
  Rng data(3);
  const auto tr = toy_windows(40, data);
  const auto va = toy_windows(15, data);
  const LabeledSet train_set = make_labeled_set(ptrs(tr), kLabels);
  const LabeledSet val_set = make_labeled_set(ptrs(va), kLabels);
  TrainingConfig cfg;
  cfg.epochs = 25;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  Rng r1(11), r2(11);
  const TrainResult a = train(train_set, val_set, kLabels, tiny(), cfg, r1);
  const TrainResult b = train(train_set, val_set, kLabels, tiny(), cfg, r2);
  REQUIRE(a.history.size() == 25);
  CHECK(a.params.values == b.params.values);
  CHECK(a.history.back().validation_accuracy == b.history.back().validation_accuracy);
  CHECK(a.history.back().mean_loss < a.history.front().mean_loss);
  CHECK(a.history.back().validation_accuracy > 0.9);
  CHECK(evaluate(a.params, val_set).accuracy == a.history.back().validation_accuracy);
  CHECK(a.params.labels == kLabels);
  CHECK(a.params.input_scale.minCoeff() > 0.0);
  std::ostringstream os;
  write_history_csv(os, a.history);
  CHECK(os.str().rfind("epoch,train_acc,val_acc,mean_loss\n", 0) == 0);
}

TEST_CASE("evaluation confusion counts") {
  Rng data(4);
  const auto w = toy_windows(5, data);
  const LabeledSet s = make_labeled_set(ptrs(w), kLabels);
  Rng rng(1);
  ClassifierParams p = ClassifierParams::init(tiny(), rng);
  const Evaluation e = evaluate(p, s);
  CHECK(e.confusion.sum() == 15.0);
  CHECK(e.confusion.rowwise().sum() == Eigen::Vector3d(5, 5, 5));
  CHECK(e.accuracy == doctest::Approx(e.confusion.trace() / 15.0));
  Eigen::MatrixXd post;
  const auto pred = predict(p, s.windows, &post);
  CHECK(post.rows() == 15);
  for (Eigen::Index r = 0; r < post.rows(); ++r) {
    Eigen::Index arg = 0;
    post.row(r).maxCoeff(&arg);
    CHECK(pred[static_cast<std::size_t>(r)] == arg);
  }
}

TEST_CASE("training input checks") {
  Rng data(5);
  auto w = toy_windows(4, data);
  TrainingConfig cfg;
  cfg.epochs = 1;
  Rng rng(1);
  CHECK_THROWS_AS(train(LabeledSet{}, LabeledSet{}, kLabels, tiny(), cfg, rng), std::invalid_argument);
  const auto all = ptrs(w);
  std::vector<const FeatureWindow*> only_a(all.begin(), all.begin() + 4);
  CHECK_THROWS_AS(train(make_labeled_set(only_a, kLabels), LabeledSet{}, kLabels, tiny(), cfg, rng),
                  std::invalid_argument);
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("non-finite features stop training") {
  Rng data(6);
  auto w = toy_windows(4, data);
  w[2].features(3, 1) = std::numeric_limits<double>::infinity();
  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.standardize = false;
  Rng rng(1);
  try {
    train(make_labeled_set(ptrs(w), kLabels), LabeledSet{}, kLabels, tiny(), cfg, rng);
    FAIL("expected divergence");
  } catch (const TrainingDivergence& e) {
    CHECK(e.epoch() == 1);
  }
}

TEST_CASE("posterior evolution over a stream") {
  Rng rng(7);
  const Architecture a = tiny();
  const ClassifierParams p = ClassifierParams::init(a, rng);
  Eigen::MatrixXd stream(40, 2);
  std::vector<double> times;
  for (int r = 0; r < 40; ++r) {
    stream(r, 0) = normal(rng, 1.0);
    stream(r, 1) = normal(rng, 1.0);
    times.push_back(0.1 * r);
  }
  const auto series = posterior_evolution(p, stream, times, 12, 4);
  REQUIRE(series.size() == 8);
  CHECK(series[0].tau == doctest::Approx(1.1));
  CHECK(series[7].tau == doctest::Approx(3.9));
  for (const auto& pt : series) CHECK(std::abs(pt.posterior.sum() - 1.0) < 1e-12);
  CHECK(series[2].posterior.isApprox(forward(p, stream.middleRows(8, 12)), 1e-14));
  CHECK(posterior_evolution(p, stream.topRows(5), std::vector<double>(times.begin(), times.begin() + 5), 12, 4).empty());
  CHECK_THROWS_AS(posterior_evolution(p, stream, times, 12, 0), std::invalid_argument);
  std::ostringstream os;
  write_posterior_csv(os, series, kLabels);
  CHECK(os.str().rfind("tau,p_a,p_b,p_c\n", 0) == 0);
}

TEST_CASE("training config JSON") {
  TrainingConfig c;
  c.epochs = 7;
  c.loss.kind = LossKind::AFL;
  c.loss.gamma = Eigen::Vector3d(1, 2, 3);
  const TrainingConfig b = nlohmann::json(c).get<TrainingConfig>();
  CHECK(b.epochs == 7);
  CHECK(b.loss.kind == LossKind::AFL);
  CHECK(b.loss.gamma == c.loss.gamma);
  CHECK(nlohmann::json::object().get<TrainingConfig>().epochs == 100);
}

}  // TEST_SUITE
