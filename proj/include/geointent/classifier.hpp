#pragma once

#include "geointent/losses.hpp"
#include "geointent/rng.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geointent {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Shape of the sequence classifier. A window of W = sub_windows * sub_window
/// steps is cut into non-overlapping sub-windows; each is encoded by two
/// valid-padding 1D convolutions (ReLU), dropout and max-pooling, the
/// encodings are aggregated by an LSTM, and a ReLU dense layer feeds the
/// softmax head.
struct Architecture {
  int features = 5;
  int sub_window = 10;
  int sub_windows = 5;
  int conv_filters = 64;
  int kernel = 3;
  int pool = 2;
  int hidden = 20;
  int dense = 100;
  int classes = 3;
  double dropout = 0.5;
  bool bidirectional = false;
  bool attention = false;
  int attention_units = 16;

  /// Reference stack for a window of `window` steps (10-step sub-windows).
  static Architecture standard(int features, int window, int classes);

  int window() const { return sub_window * sub_windows; }
  int conv1_len() const { return sub_window - kernel + 1; }
  int conv2_len() const { return conv1_len() - kernel + 1; }
  int pooled_len() const { return conv2_len() / pool; }
  int flat_size() const { return pooled_len() * conv_filters; }
  int recurrent_out() const { return bidirectional ? 2 * hidden : hidden; }
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Offsets of every tensor inside the flat parameter vector.
struct ParamLayout {
  struct Lstm {
    std::size_t wx = 0, wh = 0, b = 0;
  };
  std::size_t conv1_w = 0, conv1_b = 0, conv2_w = 0, conv2_b = 0;
  Lstm forward, backward;
  std::size_t att_w = 0, att_b = 0, att_v = 0;
  std::size_t dense_w = 0, dense_b = 0, out_w = 0, out_b = 0;
  std::size_t total = 0;

  static ParamLayout of(const Architecture& arch);
};

/// All trainable weights as one flat vector, plus the fixed per-feature
/// input standardization and the class names.
struct ClassifierParams {
  Architecture arch;
  Eigen::VectorXd values;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;
  std::vector<std::string> labels;

  /// Fan-in scaled uniform initialization; LSTM forget-gate bias starts at 1.
  static ClassifierParams init(const Architecture& arch, Rng& rng);
  static ClassifierParams zeros(const Architecture& arch);
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  ParamLayout layout() const { return ParamLayout::of(arch); }
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an activation becomes NaN or infinite; what() names the layer.
class NonFiniteActivation : public std::runtime_error {
 public:
  explicit NonFiniteActivation(const std::string& layer)
      : std::runtime_error("non-finite activation in layer " + layer), layer_(layer) {}
  const std::string& layer() const { return layer_; }

 private:
  std::string layer_;
};

/// Posterior for one W x F window. Dropout is active only when `training`
/// is true, in which case `rng` must be non-null.
Eigen::VectorXd forward(const ClassifierParams& params, const Eigen::MatrixXd& window, bool training = false,
                        Rng* rng = nullptr);

/// Posteriors for a batch, one row per window.
Eigen::MatrixXd forward_batch(const ClassifierParams& params, std::span<const Eigen::MatrixXd* const> windows,
                              bool training = false, Rng* rng = nullptr);

struct Example {
  const Eigen::MatrixXd* window = nullptr;
  int label = 0;
  double tau = 0.0;    // decision time, used by the time-constrained loss
  double t_int = std::numeric_limits<double>::infinity();
};

struct GradientResult {
  double loss = 0.0;               // mean over the batch
  Eigen::VectorXd gradient;        // d(mean loss)/d(values)
  Eigen::MatrixXd posteriors;      // batch x classes
};

/// Mean batch loss only; with `rng` set, dropout masks are drawn exactly as
/// in gradient(), so a copy of the same generator reproduces them.
double batch_loss(const ClassifierParams& params, std::span<const Example> batch, const LossConfig& loss,
                  Rng* rng = nullptr);

/// Reverse-mode gradient of the mean batch loss. Dropout masks are drawn once
/// per batch element (when `rng` is set) and reused by the backward pass.
GradientResult gradient(const ClassifierParams& params, std::span<const Example> batch, const LossConfig& loss,
                        Rng* rng = nullptr);

void write_params(std::ostream& os, const ClassifierParams& params);
ClassifierParams read_params(std::istream& is);

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);

}  // namespace geointent
