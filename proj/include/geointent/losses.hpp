#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

namespace geointent {

/// Probabilities are clamped here before taking logs.
inline constexpr double kLogClamp = 1e-12;

enum class LossKind { CCE, AFL, TimeConstrained };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct Label {
  Eigen::VectorXd one_hot;
  bool intrusion = false;

  static Label of(int index, int classes, bool intrusion = false);
  int index() const;
};

struct LossConfig {
  LossKind kind = LossKind::CCE;
  Eigen::VectorXd gamma;  // per-class focusing exponents (AFL)
  double alpha = 1.0;     // accuracy/earliness trade-off (time-constrained)
  Eigen::MatrixXd cost_matrix;     // c(l, l'), zero diagonal
  Eigen::VectorXd intrusion_costs;  // c_l^int

  void validate(int classes) const;
};

double loss_cce(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
double loss_afl(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, const Eigen::VectorXd& gamma);
/// alpha * CCE + (1 - alpha) * tau / t_int, with tau / inf = 0. Throws
/// std::invalid_argument for t_int == 0.
double loss_time_constrained(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, double tau,
                             double t_int, double alpha);

/// Dispatches on cfg.kind. `tau` and `t_int` only matter for TimeConstrained.
double loss_value(const LossConfig& cfg, const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat,
                  double tau, double t_int);
/// dL/d(y_hat). The time penalty does not depend on y_hat.
Eigen::VectorXd loss_grad_probs(const LossConfig& cfg, const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
/// dL/d(logits) through the softmax Jacobian.
Eigen::VectorXd loss_grad_logits(const LossConfig& cfg, const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// sum_{l,l'} c(l,l') * counts(l,l') / total, counts indexed [true][predicted].
double expected_misclassification_cost(const Eigen::MatrixXd& confusion_counts,
                                       const Eigen::MatrixXd& cost_matrix);

struct IntrusionRecord {
  int label = 0;
  bool intruded = false;
};

/// sum_l c_l^int * (fraction of label-l records that intrude).
double intrusion_cost_metric(const std::vector<IntrusionRecord>& records,
                             const Eigen::VectorXd& intrusion_costs);

void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);

}  // namespace geointent
