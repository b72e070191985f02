#pragma once

#include "geointent/classifier.hpp"
#include "geointent/tracking_imm.hpp"

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace geointent {

struct TrainingConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  LossConfig loss;
  /// Fit per-feature mean/scale on the training windows.
  bool standardize = true;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  double mean_loss = 0.0;
};

class TrainingDivergence : public std::runtime_error {
 public:
  explicit TrainingDivergence(int epoch)
      : std::runtime_error("training diverged (non-finite loss) in epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

struct TrainResult {
  ClassifierParams params;
  std::vector<EpochRecord> history;
};

/// Windows paired with class indices into `labels`.
struct LabeledSet {
  std::vector<const FeatureWindow*> windows;
  std::vector<int> labels;
  /// Intrusion time per window (infinity when the trajectory never intrudes).
  std::vector<double> intrusion_times;

  std::size_t size() const { return windows.size(); }
};

/// Maps window labels onto class indices; unknown labels throw.
LabeledSet make_labeled_set(const std::vector<const FeatureWindow*>& windows, const std::vector<std::string>& labels,
                            const std::map<std::string, double>& intrusion_times = {});

/// Downsamples every class to the smallest class count.
LabeledSet balance_classes(const LabeledSet& set, int classes, Rng& rng);

/// Mini-batch Adam on the mean batch loss. Training accuracy is read off the
/// training-mode posteriors of each batch, validation accuracy is measured in
/// inference mode after the epoch; `validation` may be empty.
TrainResult train(const LabeledSet& training, const LabeledSet& validation, const std::vector<std::string>& labels,
                  const Architecture& arch, const TrainingConfig& cfg, Rng& rng);

/// Inference-mode predictions in batches.
std::vector<int> predict(const ClassifierParams& params, const std::vector<const FeatureWindow*>& windows,
                         Eigen::MatrixXd* posteriors = nullptr);

struct Evaluation {
  double accuracy = 0.0;
  Eigen::MatrixXd confusion;  // [true][predicted] counts
};

Evaluation evaluate(const ClassifierParams& params, const LabeledSet& set);

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);

struct PosteriorPoint {
  double tau = 0.0;
  Eigen::VectorXd posterior;
};

/// Posterior for each complete window of a per-step feature stream (rows are
/// time steps); `times` gives each row's time stamp.
std::vector<PosteriorPoint> posterior_evolution(const ClassifierParams& params, const Eigen::MatrixXd& stream,
                                                const std::vector<double>& times, int window, int stride);

void write_posterior_csv(std::ostream& os, const std::vector<PosteriorPoint>& series,
                         const std::vector<std::string>& labels);

void to_json(nlohmann::json& j, const TrainingConfig& c);
void from_json(const nlohmann::json& j, TrainingConfig& c);

}  // namespace geointent
