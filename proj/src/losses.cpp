#include "geointent/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geointent {

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::CCE: return "cce";
    case LossKind::AFL: return "afl";
    case LossKind::TimeConstrained: return "time_constrained";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "cce" || s == "CCE") return LossKind::CCE;
  if (s == "afl" || s == "AFL") return LossKind::AFL;
  if (s == "time_constrained" || s == "TIME_CONSTRAINED") return LossKind::TimeConstrained;
  throw std::invalid_argument("unknown loss kind '" + s + "'");
}

Label Label::of(int index, int classes, bool intrusion) {
  if (index < 0 || index >= classes) throw std::out_of_range("label index out of range");
  Label l;
  l.one_hot = Eigen::VectorXd::Zero(classes);
  l.one_hot[index] = 1.0;
  l.intrusion = intrusion;
  return l;
}

int Label::index() const {
  Eigen::Index i = 0;
  one_hot.maxCoeff(&i);
  return static_cast<int>(i);
}

void LossConfig::validate(int classes) const {
  if (kind == LossKind::AFL) {
    if (gamma.size() != classes) throw std::invalid_argument("AFL gamma must have one entry per class");
    if ((gamma.array() < 0.0).any()) throw std::invalid_argument("AFL gamma must be >= 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
  if (cost_matrix.size() > 0) {
    if (cost_matrix.rows() != classes || cost_matrix.cols() != classes) {
      throw std::invalid_argument("cost matrix must be classes x classes");
    }
    if ((cost_matrix.array() < 0.0).any() || cost_matrix.diagonal().cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("cost matrix must be nonnegative with zero diagonal");
    }
  }
  if (intrusion_costs.size() > 0 && (intrusion_costs.array() < 0.0).any()) {
    throw std::invalid_argument("intrusion costs must be >= 0");
  }
}

namespace {

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

void check_shapes(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("label and posterior sizes differ");
}

}  // namespace

double loss_cce(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  check_shapes(y, y_hat);
  double l = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0) l -= y[i] * clamped_log(y_hat[i]);
  }
  return l;
}

double loss_afl(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, const Eigen::VectorXd& gamma) {
  check_shapes(y, y_hat);
  if (gamma.size() != y.size()) throw std::invalid_argument("gamma size differs from class count");
  double l = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    const double focus = gamma[i] == 0.0 ? 1.0 : std::pow(1.0 - y_hat[i], gamma[i]);
    l -= y[i] * focus * clamped_log(y_hat[i]);
  }
  return l;
}

double loss_time_constrained(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, double tau,
                             double t_int, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
  if (t_int == 0.0) throw std::invalid_argument("intrusion at launch: tau / T_int undefined");
  const double penalty = std::isinf(t_int) ? 0.0 : tau / t_int;
  if (alpha == 1.0) return loss_cce(y, y_hat);
  return alpha * loss_cce(y, y_hat) + (1.0 - alpha) * penalty;
}

double loss_value(const LossConfig& cfg, const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat,
                  double tau, double t_int) {
  switch (cfg.kind) {
    case LossKind::CCE: return loss_cce(y, y_hat);
    case LossKind::AFL: return loss_afl(y, y_hat, cfg.gamma);
    case LossKind::TimeConstrained: return loss_time_constrained(y, y_hat, tau, t_int, cfg.alpha);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd loss_grad_probs(const LossConfig& cfg, const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  check_shapes(y, y_hat);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    const double p = y_hat[i];
    // d/dp of log(max(p, clamp)) vanishes below the clamp.
    const double dlog = p > kLogClamp ? 1.0 / p : 0.0;
    switch (cfg.kind) {
      case LossKind::CCE:
        g[i] = -y[i] * dlog;
        break;
      case LossKind::TimeConstrained:
        g[i] = -cfg.alpha * y[i] * dlog;
        break;
      case LossKind::AFL: {
        const double gm = cfg.gamma[i];
        if (gm == 0.0) {
          g[i] = -y[i] * dlog;
        } else {
          const double q = 1.0 - p;
          const double focus = std::pow(q, gm);
          const double dfocus = q > 0.0 ? -gm * std::pow(q, gm - 1.0) : 0.0;
          g[i] = -y[i] * (dfocus * clamped_log(p) + focus * dlog);
        }
        break;
      }
    }
  }
  return g;
}

Eigen::VectorXd loss_grad_logits(const LossConfig& cfg, const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  const Eigen::VectorXd g = loss_grad_probs(cfg, y, y_hat);
  // J_softmax^T g = p * (g - <p, g>)
  return y_hat.array() * (g.array() - y_hat.dot(g));
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

double expected_misclassification_cost(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& cost) {
  if (counts.rows() != cost.rows() || counts.cols() != cost.cols()) {
    throw std::invalid_argument("confusion and cost matrices differ in shape");
  }
  if ((counts.array() < 0.0).any()) throw std::invalid_argument("confusion counts must be >= 0");
  const double total = counts.sum();
  if (total == 0.0) return 0.0;
  return (cost.array() * counts.array()).sum() / total;
}

double intrusion_cost_metric(const std::vector<IntrusionRecord>& records, const Eigen::VectorXd& costs) {
  const auto n = costs.size();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd intruded = Eigen::VectorXd::Zero(n);
  for (const auto& r : records) {
    if (r.label < 0 || r.label >= n) throw std::out_of_range("intrusion record label out of range");
    total[r.label] += 1.0;
    if (r.intruded) intruded[r.label] += 1.0;
  }
  double metric = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (total[l] > 0.0) metric += costs[l] * (intruded[l] / total[l]);
  }
  return metric;
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const LossConfig& c) {
  std::vector<std::vector<double>> cost;
  for (Eigen::Index r = 0; r < c.cost_matrix.rows(); ++r) {
    cost.emplace_back(c.cost_matrix.row(r).begin(), c.cost_matrix.row(r).end());
  }
  j = nlohmann::json{{"kind", to_string(c.kind)},
                     {"gamma", to_vec(c.gamma)},
                     {"alpha", c.alpha},
                     {"cost_matrix", cost},
                     {"intrusion_costs", to_vec(c.intrusion_costs)}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  c.kind = loss_kind_from_string(j.value("kind", std::string("cce")));
  c.gamma = from_vec(j.value("gamma", std::vector<double>{}));
  c.alpha = j.value("alpha", 1.0);
  const auto cost = j.value("cost_matrix", std::vector<std::vector<double>>{});
  c.cost_matrix.resize(static_cast<Eigen::Index>(cost.size()), static_cast<Eigen::Index>(cost.size()));
  for (std::size_t r = 0; r < cost.size(); ++r) {
    for (std::size_t k = 0; k < cost.size(); ++k) {
      c.cost_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = cost[r].at(k);
    }
  }
  c.intrusion_costs = from_vec(j.value("intrusion_costs", std::vector<double>{}));
}

}  // namespace geointent
