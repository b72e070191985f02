#include "geointent/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace geointent {

void TrainingConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("Adam decays must be in [0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

namespace {

// Fisher-Yates driven directly by the engine so the order is identical across
// standard library implementations.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  Eigen::Index i = 0;
  p.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace

LabeledSet make_labeled_set(const std::vector<const FeatureWindow*>& windows, const std::vector<std::string>& labels,
                            const std::map<std::string, double>& intrusion_times) {
  LabeledSet s;
  for (const auto* w : windows) {
    const auto it = std::find(labels.begin(), labels.end(), w->label);
    if (it == labels.end()) throw std::invalid_argument("window label '" + w->label + "' is not a known class");
    s.windows.push_back(w);
    s.labels.push_back(static_cast<int>(it - labels.begin()));
    const auto t = intrusion_times.find(w->trajectory_id);
    s.intrusion_times.push_back(t != intrusion_times.end() ? t->second : kNeverIntrudes);
  }
  return s;
}

LabeledSet balance_classes(const LabeledSet& set, int classes, Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < set.size(); ++i) by_class.at(static_cast<std::size_t>(set.labels[i])).push_back(i);
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const auto& c : by_class) n = std::min(n, c.size());
  std::vector<std::size_t> keep;
  for (auto& c : by_class) {
    shuffle(c, rng);
    keep.insert(keep.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n));
  }
  std::sort(keep.begin(), keep.end());
  LabeledSet out;
  for (auto i : keep) {
    out.windows.push_back(set.windows[i]);
    out.labels.push_back(set.labels[i]);
    out.intrusion_times.push_back(set.intrusion_times[i]);
  }
  return out;
}

std::vector<int> predict(const ClassifierParams& params, const std::vector<const FeatureWindow*>& windows,
                         Eigen::MatrixXd* posteriors) {
  constexpr std::size_t kBatch = 64;
  std::vector<int> out;
  out.reserve(windows.size());
  if (posteriors) posteriors->resize(static_cast<Eigen::Index>(windows.size()), params.arch.classes);
  std::vector<const Eigen::MatrixXd*> batch;
  for (std::size_t start = 0; start < windows.size(); start += kBatch) {
    batch.clear();
    const std::size_t end = std::min(windows.size(), start + kBatch);
    for (std::size_t i = start; i < end; ++i) batch.push_back(&windows[i]->features);
    const Eigen::MatrixXd p = forward_batch(params, batch);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      out.push_back(argmax(p.row(r)));
      if (posteriors) posteriors->row(static_cast<Eigen::Index>(start) + r) = p.row(r);
    }
  }
  return out;
}

Evaluation evaluate(const ClassifierParams& params, const LabeledSet& set) {
  Evaluation e;
  const int k = params.arch.classes;
  e.confusion = Eigen::MatrixXd::Zero(k, k);
  if (set.size() == 0) return e;
  const auto pred = predict(params, set.windows);
  for (std::size_t i = 0; i < set.size(); ++i) e.confusion(set.labels[i], pred[i]) += 1.0;
  e.accuracy = e.confusion.trace() / static_cast<double>(set.size());
  return e;
}

TrainResult train(const LabeledSet& training, const LabeledSet& validation, const std::vector<std::string>& labels,
                  const Architecture& arch, const TrainingConfig& cfg, Rng& rng) {
  cfg.validate();
  cfg.loss.validate(arch.classes);
  if (training.size() == 0) throw std::invalid_argument("empty training set");
  if (static_cast<int>(labels.size()) != arch.classes) throw std::invalid_argument("label count differs from classes");
  {
    std::vector<int> seen(static_cast<std::size_t>(arch.classes), 0);
    for (int l : training.labels) seen.at(static_cast<std::size_t>(l)) = 1;
    if (std::accumulate(seen.begin(), seen.end(), 0) < 2) throw std::invalid_argument("training set needs >= 2 classes");
  }

  TrainResult result;
  ClassifierParams& P = result.params;
  P = ClassifierParams::init(arch, rng);
  P.labels = labels;
  if (cfg.standardize) {
    const int F = arch.features;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(F), sq = Eigen::VectorXd::Zero(F);
    double n = 0.0;
    for (const auto* w : training.windows) {
      sum += w->features.colwise().sum().transpose();
      sq += w->features.array().square().matrix().colwise().sum().transpose();
      n += static_cast<double>(w->features.rows());
    }
    P.input_mean = sum / n;
    const Eigen::VectorXd var = (sq / n - P.input_mean.cwiseProduct(P.input_mean)).cwiseMax(0.0);
    P.input_scale = var.cwiseSqrt().unaryExpr([](double s) { return s > 1e-9 ? s : 1.0; });
  }

  Eigen::VectorXd m = Eigen::VectorXd::Zero(P.values.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(P.values.size());
  long step = 0;
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Example> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        batch.push_back({&training.windows[i]->features, training.labels[i], training.windows[i]->end_time,
                         training.intrusion_times[i]});
      }
      GradientResult g;
      try {
        g = gradient(P, batch, cfg.loss, &rng);
      } catch (const NonFiniteActivation&) {
        throw TrainingDivergence(epoch);
      }
      if (!std::isfinite(g.loss)) throw TrainingDivergence(epoch);
      loss_sum += g.loss * static_cast<double>(batch.size());
      for (std::size_t b = 0; b < batch.size(); ++b) {
        if (argmax(g.posteriors.row(static_cast<Eigen::Index>(b))) == batch[b].label) ++correct;
      }
      ++step;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g.gradient;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.gradient.cwiseProduct(g.gradient);
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      P.values.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(training.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(training.size());
    rec.validation_accuracy = validation.size() > 0 ? evaluate(P, validation).accuracy
                                                    : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(rec.mean_loss)) throw TrainingDivergence(epoch);
    result.history.push_back(rec);
  }
  return result;
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,train_acc,val_acc,mean_loss\n" << std::setprecision(10);
  for (const auto& r : history) {
    os << r.epoch << ',' << r.train_accuracy << ',' << r.validation_accuracy << ',' << r.mean_loss << '\n';
  }
}

std::vector<PosteriorPoint> posterior_evolution(const ClassifierParams& params, const Eigen::MatrixXd& stream,
                                                const std::vector<double>& times, int window, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (static_cast<Eigen::Index>(times.size()) != stream.rows()) throw std::invalid_argument("times and stream differ in length");
  std::vector<PosteriorPoint> out;
  std::vector<Eigen::MatrixXd> windows;
  for (Eigen::Index s = 0; s + window <= stream.rows(); s += stride) windows.push_back(stream.middleRows(s, window));
  if (windows.empty()) return out;
  std::vector<const Eigen::MatrixXd*> ptrs;
  for (const auto& w : windows) ptrs.push_back(&w);
  const Eigen::MatrixXd p = forward_batch(params, ptrs);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const std::size_t last = k * static_cast<std::size_t>(stride) + static_cast<std::size_t>(window) - 1;
    out.push_back({times[last], p.row(static_cast<Eigen::Index>(k)).transpose()});
  }
  return out;
}

void write_posterior_csv(std::ostream& os, const std::vector<PosteriorPoint>& series,
                         const std::vector<std::string>& labels) {
  os << "tau";
  for (const auto& l : labels) os << ",p_" << l;
  os << '\n' << std::setprecision(17);
  for (const auto& pt : series) {
    os << pt.tau;
    for (Eigen::Index i = 0; i < pt.posterior.size(); ++i) os << ',' << pt.posterior[i];
    os << '\n';
  }
}

void to_json(nlohmann::json& j, const TrainingConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},     {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
                     {"beta1", c.beta1},       {"beta2", c.beta2},           {"epsilon", c.epsilon},
                     {"loss", c.loss},         {"standardize", c.standardize}};
}

void from_json(const nlohmann::json& j, TrainingConfig& c) {
  const TrainingConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.epsilon = j.value("epsilon", d.epsilon);
  if (j.contains("loss")) c.loss = j.at("loss").get<LossConfig>();
  c.standardize = j.value("standardize", d.standardize);
}

}  // namespace geointent
