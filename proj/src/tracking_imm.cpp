#include "geointent/tracking_imm.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace geointent {

Eigen::Matrix<double, 3, 9> position_selector() {
  Eigen::Matrix<double, 3, 9> H = Eigen::Matrix<double, 3, 9>::Zero();
  H(0, kX) = 1.0;
  H(1, kY) = 1.0;
  H(2, kZ) = 1.0;
  return H;
}

namespace {

Matrix9d symmetrize(const Matrix9d& P) { return 0.5 * (P + P.transpose()); }

constexpr double kTimeTolerance = 1e-6;

}  // namespace

TrackState kf_predict(const TrackState& track, const ModeModel& model) {
  const Matrix9d F = kinematic_transition(model);
  TrackState out;
  out.t = track.t + model.period;
  out.mean = F * track.mean;
  out.covariance = symmetrize(F * track.covariance * F.transpose() + process_noise(model));
  out.nis = track.nis;
  return out;
}

Innovation innovation(const TrackState& predicted, const CartesianMeasurement& z) {
  const auto H = position_selector();
  Innovation inn;
  inn.residual = z.position - H * predicted.mean;
  inn.covariance = H * predicted.covariance * H.transpose() + z.covariance;
  inn.covariance = 0.5 * (inn.covariance + inn.covariance.transpose()).eval();
  Eigen::LLT<Eigen::Matrix3d> llt(inn.covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("innovation covariance is not positive definite");
  }
  const Eigen::Vector3d w = llt.matrixL().solve(inn.residual);
  inn.nis = w.squaredNorm();
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  inn.log_likelihood = -0.5 * (inn.nis + log_det + 3.0 * std::log(2.0 * std::numbers::pi));
  return inn;
}

TrackState kf_update(const TrackState& predicted, const CartesianMeasurement& z) {
  const Innovation inn = innovation(predicted, z);
  const auto H = position_selector();
  const Eigen::Matrix<double, 9, 3> PHt = predicted.covariance * H.transpose();
  const Eigen::Matrix<double, 9, 3> K = inn.covariance.llt().solve(PHt.transpose()).transpose();
  const Matrix9d IKH = Matrix9d::Identity() - K * H;

  TrackState out;
  out.t = predicted.t;
  out.mean = predicted.mean + K * inn.residual;
  out.covariance = symmetrize(IKH * predicted.covariance * IKH.transpose() + K * z.covariance * K.transpose());
  out.nis = inn.nis;
  return out;
}

TrackState kf_step(const TrackState& track, const ModeModel& model, const CartesianMeasurement& z) {
  if (std::abs(z.t - (track.t + model.period)) > kTimeTolerance) {
    throw std::invalid_argument("kf_step: measurement is not one period ahead of the track");
  }
  return kf_update(kf_predict(track, model), z);
}

void ImmBank::validate() const {
  const auto n = static_cast<Eigen::Index>(modes.size());
  if (n == 0) throw std::invalid_argument("IMM bank is empty");
  if (transition.rows() != n || transition.cols() != n) {
    throw std::invalid_argument("IMM transition matrix shape does not match the bank");
  }
  if ((transition.array() < 0.0).any()) throw std::invalid_argument("IMM transition has negative entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(transition.row(i).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("IMM transition rows must sum to 1");
    }
  }
  for (const auto& m : modes) m.validate();
}

Eigen::MatrixXd ImmBank::markov(std::size_t n, double stay) {
  if (n == 1) return Eigen::MatrixXd::Ones(1, 1);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Constant(N, N, (1.0 - stay) / static_cast<double>(n - 1));
  P.diagonal().setConstant(stay);
  return P;
}

ImmBank ImmBank::standard(int dim, double period, double bank_rate, double stay, double maneuver_intensity) {
  ImmBank bank;
  bank.modes.push_back(ModeModel::cv(period, kTrackerQuietIntensity));
  bank.modes.push_back(ModeModel::ca(period, maneuver_intensity));
  if (dim == 3) {
    bank.modes.push_back(ModeModel::ct3d(bank_rate, period, kTrackerTurnIntensity));
    bank.modes.push_back(ModeModel::ct3d(-bank_rate, period, kTrackerTurnIntensity));
  } else {
    bank.modes.push_back(ModeModel::hct(bank_rate, period, kTrackerTurnIntensity));
    bank.modes.push_back(ModeModel::hct(-bank_rate, period, kTrackerTurnIntensity));
  }
  bank.transition = markov(bank.modes.size(), stay);
  return bank;
}

IMMState imm_init(const TrackState& initial, const ImmBank& bank) {
  const auto n = static_cast<Eigen::Index>(bank.modes.size());
  return imm_init(initial, bank, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

IMMState imm_init(const TrackState& initial, const ImmBank& bank, const Eigen::VectorXd& probabilities) {
  bank.validate();
  if (probabilities.size() != static_cast<Eigen::Index>(bank.modes.size())) {
    throw std::invalid_argument("imm_init: probability vector size does not match the bank");
  }
  IMMState imm;
  imm.bank = bank;
  imm.per_mode.assign(bank.modes.size(), initial);
  imm.mode_probabilities = probabilities / probabilities.sum();
  imm.t = initial.t;
  return imm;
}

IMMState imm_predict(const IMMState& imm) {
  const std::size_t n = imm.per_mode.size();
  const auto N = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd& Pi = imm.bank.transition;
  const Eigen::VectorXd& mu = imm.mode_probabilities;

  // c_j = sum_i Pi(i,j) mu_i, mixing weights mu_{i|j} = Pi(i,j) mu_i / c_j.
  const Eigen::VectorXd cbar = Pi.transpose() * mu;

  IMMState out;
  out.bank = imm.bank;
  out.per_mode.resize(n);
  out.t = imm.t + imm.bank.modes.front().period;
  for (Eigen::Index j = 0; j < N; ++j) {
    TrackState mixed;
    mixed.t = imm.t;
    if (cbar[j] > 0.0) {
      mixed.mean.setZero();
      for (Eigen::Index i = 0; i < N; ++i) {
        mixed.mean += (Pi(i, j) * mu[i] / cbar[j]) * imm.per_mode[i].mean;
      }
      mixed.covariance.setZero();
      for (Eigen::Index i = 0; i < N; ++i) {
        const double w = Pi(i, j) * mu[i] / cbar[j];
        const Vector9d d = imm.per_mode[i].mean - mixed.mean;
        mixed.covariance += w * (imm.per_mode[i].covariance + d * d.transpose());
      }
    } else {
      mixed = imm.per_mode[j];
    }
    mixed.nis = imm.per_mode[j].nis;
    out.per_mode[j] = kf_predict(mixed, imm.bank.modes[j]);
  }
  out.mode_probabilities = cbar / cbar.sum();
  return out;
}

IMMState imm_update(const IMMState& predicted, const CartesianMeasurement& z) {
  const std::size_t n = predicted.per_mode.size();
  IMMState out = predicted;
  Eigen::VectorXd loglik(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const Innovation inn = innovation(predicted.per_mode[j], z);
    loglik[static_cast<Eigen::Index>(j)] = inn.log_likelihood;
    out.per_mode[j] = kf_update(predicted.per_mode[j], z);
  }

  const double max_ll = loglik.maxCoeff();
  Eigen::VectorXd post;
  if (!std::isfinite(max_ll) || max_ll < std::log(std::numeric_limits<double>::min())) {
    // Every likelihood underflows: keep the predicted probabilities.
    out.degenerate_step = true;
    post = predicted.mode_probabilities;
  } else {
    out.degenerate_step = false;
    post = predicted.mode_probabilities.array() * (loglik.array() - max_ll).exp();
  }
  const double total = post.sum();
  out.mode_probabilities = total > 0.0 ? Eigen::VectorXd(post / total) : predicted.mode_probabilities;
  return out;
}

IMMState imm_step(const IMMState& imm, const CartesianMeasurement& z) {
  const double period = imm.bank.modes.front().period;
  if (std::abs(z.t - (imm.t + period)) > kTimeTolerance) {
    throw std::invalid_argument("imm_step: measurement is not one period ahead of the state");
  }
  return imm_update(imm_predict(imm), z);
}

CombinedEstimate combined_estimate(const IMMState& imm, int dim) {
  CombinedEstimate est;
  est.mode_probabilities = imm.mode_probabilities;
  est.state.t = imm.t;
  est.state.s.setZero();
  const auto n = static_cast<Eigen::Index>(imm.per_mode.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    est.state.s += imm.mode_probabilities[j] * imm.per_mode[j].mean;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector9d d = imm.per_mode[j].mean - est.state.s;
    est.covariance += imm.mode_probabilities[j] * (imm.per_mode[j].covariance + d * d.transpose());
  }
  if (dim == 3) {
    est.turn_rate = horizontal_turn_rate(est.state.s);
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (is_turning(imm.bank.modes[j].mode)) {
        est.turn_rate += imm.mode_probabilities[j] * imm.bank.modes[j].turn_rate;
      }
    }
  }
  return est;
}

TrackerConfig TrackerConfig::standard(int dim, double period) {
  TrackerConfig cfg;
  cfg.dim = dim;
  cfg.period = period;
  cfg.bank = ImmBank::standard(dim, period);
  return cfg;
}

double TrackerConfig::gate_threshold() const {
  boost::math::chi_squared chi(3.0);
  return boost::math::quantile(chi, gate_probability);
}

namespace {

TrackState two_point_init(const CartesianMeasurement& z1, const CartesianMeasurement& z2,
                          const TrackerConfig& cfg) {
  const double dt = z2.t - z1.t;
  TrackState init;
  init.t = z2.t;
  init.mean.setZero();
  init.covariance.setZero();
  for (int a = 0; a < 3; ++a) {
    init.mean[3 * a] = z2.position[a];
    init.mean[3 * a + 1] = (z2.position[a] - z1.position[a]) / dt;
  }
  // Blocks of the differencing estimator; off-axis correlations kept.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double r2 = z2.covariance(a, b);
      const double r1 = z1.covariance(a, b);
      init.covariance(3 * a, 3 * b) = r2;
      init.covariance(3 * a, 3 * b + 1) = r2 / dt;
      init.covariance(3 * a + 1, 3 * b) = r2 / dt;
      init.covariance(3 * a + 1, 3 * b + 1) = (r1 + r2) / (dt * dt);
    }
    init.covariance(3 * a + 2, 3 * a + 2) = cfg.init_accel_sigma * cfg.init_accel_sigma;
  }
  init.covariance *= cfg.init_inflation;
  return init;
}

struct Candidate {
  CartesianMeasurement z;
};

}  // namespace

std::vector<TrackPoint> run_tracker(const std::vector<RadarLook>& looks, const RadarConfig& radar,
                                    const TrackerConfig& cfg) {
  cfg.bank.validate();
  const double gate = cfg.gate_threshold();
  std::vector<TrackPoint> out;
  if (looks.empty()) return out;

  // Expand to the uniform look grid so that empty looks become misses.
  const double t0 = looks.front().t;
  const auto last = static_cast<long>(std::lround((looks.back().t - t0) / cfg.period));
  std::vector<const RadarLook*> grid(static_cast<std::size_t>(last + 1), nullptr);
  for (const auto& look : looks) {
    const long k = std::lround((look.t - t0) / cfg.period);
    if (k >= 0 && k <= last) grid[static_cast<std::size_t>(k)] = &look;
  }

  std::optional<IMMState> imm;
  std::vector<CartesianMeasurement> pending;  // detections of the previous look, for initiation
  int segment = -1;
  int misses = 0;

  for (long k = 0; k <= last; ++k) {
    const double t = t0 + static_cast<double>(k) * cfg.period;
    std::vector<CartesianMeasurement> zs;
    if (const RadarLook* look = grid[static_cast<std::size_t>(k)]) {
      for (const auto& d : look->detections) {
        CartesianMeasurement z = to_cartesian(d, radar);
        z.t = t;
        zs.push_back(z);
      }
    }

    if (!imm) {
      // Two-point initiation from consecutive looks with a plausible speed.
      double best_speed = std::numeric_limits<double>::infinity();
      const CartesianMeasurement* b1 = nullptr;
      const CartesianMeasurement* b2 = nullptr;
      for (const auto& z1 : pending) {
        for (const auto& z2 : zs) {
          const double speed = (z2.position - z1.position).norm() / cfg.period;
          if (speed <= cfg.max_init_speed && speed < best_speed) {
            best_speed = speed;
            b1 = &z1;
            b2 = &z2;
          }
        }
      }
      if (b1 != nullptr) {
        imm = imm_init(two_point_init(*b1, *b2, cfg), cfg.bank);
        ++segment;
        misses = 0;
        out.push_back({t, segment, true, combined_estimate(*imm, cfg.dim)});
        pending.clear();
      } else {
        pending = zs;
      }
      continue;
    }

    IMMState predicted = imm_predict(*imm);
    const CartesianMeasurement* chosen = nullptr;
    double best_nis = gate;
    for (const auto& z : zs) {
      double nis = std::numeric_limits<double>::infinity();
      for (const auto& mode : predicted.per_mode) nis = std::min(nis, innovation(mode, z).nis);
      if (nis <= best_nis) {
        best_nis = nis;
        chosen = &z;
      }
    }

    if (chosen == nullptr && cfg.maneuver_gate > 0.0) {
      // Nothing inside the statistical gate: a detection close to the
      // predicted position signals a maneuver the bank did not anticipate.
      const Eigen::Vector3d at = combined_estimate(predicted, cfg.dim).state.position();
      double best = cfg.maneuver_gate;
      for (const auto& z : zs) {
        const double d = (z.position - at).norm();
        if (d <= best) {
          best = d;
          chosen = &z;
        }
      }
      if (chosen != nullptr) {
        const double sv = cfg.maneuver_velocity_sigma * cfg.maneuver_velocity_sigma;
        const double sa = cfg.maneuver_accel_sigma * cfg.maneuver_accel_sigma;
        for (auto& mode : predicted.per_mode) {
          for (int a = 0; a < cfg.dim; ++a) {
            mode.covariance(3 * a + 1, 3 * a + 1) += sv;
            mode.covariance(3 * a + 2, 3 * a + 2) += sa;
          }
        }
      }
    }

    if (chosen != nullptr) {
      imm = imm_update(predicted, *chosen);
      misses = 0;
    } else {
      imm = std::move(predicted);
      ++misses;
    }
    out.push_back({t, segment, chosen != nullptr, combined_estimate(*imm, cfg.dim)});

    if (misses > cfg.max_coast) {
      // Drop the coasting tail so segments end on a real update.
      while (!out.empty() && out.back().segment == segment && !out.back().updated) out.pop_back();
      imm.reset();
      pending = zs;
    }
  }
  return out;
}

int feature_count(int dim) { return dim == 3 ? 7 : 5; }

Eigen::VectorXd feature_row(const CombinedEstimate& est, int dim) {
  const Vector9d& s = est.state.s;
  Eigen::VectorXd f(feature_count(dim));
  if (dim == 3) {
    f << s[kVx], s[kVy], s[kVz], s[kAx], s[kAy], s[kAz], est.turn_rate;
  } else {
    f << s[kVx], s[kVy], s[kAx], s[kAy], est.turn_rate;
  }
  return f;
}

std::vector<FeatureWindow> extract_features(const std::vector<TrackPoint>& track, int dim, int window,
                                            double overlap, const std::string& label,
                                            const std::string& trajectory_id, bool intrusion) {
  if (window < 1) throw std::invalid_argument("extract_features: window must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("extract_features: overlap must be in [0,1)");
  const int stride = window_stride(window, overlap);
  const int F = feature_count(dim);
  std::vector<FeatureWindow> out;

  std::size_t begin = 0;
  while (begin < track.size()) {
    std::size_t end = begin;
    while (end < track.size() && track[end].segment == track[begin].segment) ++end;
    const auto len = static_cast<long>(end - begin);
    for (long off = 0; off + window <= len; off += stride) {
      FeatureWindow w;
      w.trajectory_id = trajectory_id;
      w.label = label;
      w.intrusion = intrusion;
      w.start_time = track[begin + off].t;
      w.end_time = track[begin + off + window - 1].t;
      w.features.resize(window, F);
      for (int r = 0; r < window; ++r) {
        w.features.row(r) = feature_row(track[begin + off + r].estimate, dim).transpose();
      }
      out.push_back(std::move(w));
    }
    begin = end;
  }
  return out;
}

void write_track_csv(std::ostream& os, const std::vector<TrackPoint>& track) {
  const std::size_t n_modes = track.empty() ? 0 : static_cast<std::size_t>(track.front().estimate.mode_probabilities.size());
  os << "t,segment,updated,x,vx,ax,y,vy,ay,z,vz,az,turn_rate";
  for (std::size_t m = 0; m < n_modes; ++m) os << ",p" << m;
  os << '\n';
  std::ostringstream line;
  line.precision(17);
  for (const auto& p : track) {
    line.str("");
    line << p.t << ',' << p.segment << ',' << (p.updated ? 1 : 0);
    for (int i = 0; i < 9; ++i) line << ',' << p.estimate.state.s[i];
    line << ',' << p.estimate.turn_rate;
    for (Eigen::Index m = 0; m < p.estimate.mode_probabilities.size(); ++m) {
      line << ',' << p.estimate.mode_probabilities[m];
    }
    os << line.str() << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<TrackPoint> read_track_csv(std::istream& is) {
  std::vector<TrackPoint> out;
  std::string line;
  if (!std::getline(is, line)) return out;
  const std::size_t n_modes = split_csv(line).size() - 13;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 13 + n_modes) throw std::invalid_argument("malformed track row: " + line);
    TrackPoint p;
    p.t = std::stod(cells[0]);
    p.segment = std::stoi(cells[1]);
    p.updated = cells[2] == "1";
    p.estimate.state.t = p.t;
    for (int i = 0; i < 9; ++i) p.estimate.state.s[i] = std::stod(cells[3 + i]);
    p.estimate.turn_rate = std::stod(cells[12]);
    p.estimate.mode_probabilities.resize(static_cast<Eigen::Index>(n_modes));
    for (std::size_t m = 0; m < n_modes; ++m) {
      p.estimate.mode_probabilities[static_cast<Eigen::Index>(m)] = std::stod(cells[13 + m]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_windows_csv(std::ostream& os, const std::vector<FeatureWindow>& windows) {
  const Eigen::Index W = windows.empty() ? 0 : windows.front().features.rows();
  const Eigen::Index F = windows.empty() ? 0 : windows.front().features.cols();
  os << '#' << W << ',' << F << '\n';
  std::ostringstream line;
  line.precision(17);
  for (const auto& w : windows) {
    line.str("");
    line << w.trajectory_id << ',' << w.label << ',' << (w.intrusion ? 1 : 0) << ',' << w.start_time << ','
         << w.end_time;
    for (Eigen::Index r = 0; r < w.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.features.cols(); ++c) line << ',' << w.features(r, c);
    }
    os << line.str() << '\n';
  }
}

std::vector<FeatureWindow> read_windows_csv(std::istream& is) {
  std::vector<FeatureWindow> out;
  std::string line;
  if (!std::getline(is, line)) return out;
  if (line.empty() || line[0] != '#') throw std::invalid_argument("window file lacks the #W,F header");
  const auto dims = split_csv(line.substr(1));
  const int W = std::stoi(dims.at(0));
  const int F = std::stoi(dims.at(1));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != static_cast<std::size_t>(5 + W * F)) {
      throw std::invalid_argument("malformed window row for " + cells.at(0));
    }
    FeatureWindow w;
    w.trajectory_id = cells[0];
    w.label = cells[1];
    w.intrusion = cells[2] == "1";
    w.start_time = std::stod(cells[3]);
    w.end_time = std::stod(cells[4]);
    w.features.resize(W, F);
    for (int r = 0; r < W; ++r) {
      for (int c = 0; c < F; ++c) w.features(r, c) = std::stod(cells[5 + r * F + c]);
    }
    out.push_back(std::move(w));
  }
  return out;
}

void to_json(nlohmann::json& j, const TrackerConfig& c) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : c.bank.modes) {
    modes.push_back({{"mode", to_string(m.mode)},
                     {"turn_rate", m.turn_rate},
                     {"noise_intensity", {m.noise_intensity[0], m.noise_intensity[1], m.noise_intensity[2]}}});
  }
  std::vector<std::vector<double>> pi;
  for (Eigen::Index i = 0; i < c.bank.transition.rows(); ++i) {
    pi.emplace_back(c.bank.transition.row(i).begin(), c.bank.transition.row(i).end());
  }
  j = nlohmann::json{{"dim", c.dim},
                     {"period", c.period},
                     {"modes", modes},
                     {"transition", pi},
                     {"gate_probability", c.gate_probability},
                     {"init_inflation", c.init_inflation},
                     {"init_accel_sigma", c.init_accel_sigma},
                     {"max_init_speed", c.max_init_speed},
                     {"max_coast", c.max_coast},
                     {"maneuver_gate", c.maneuver_gate},
                     {"maneuver_velocity_sigma", c.maneuver_velocity_sigma},
                     {"maneuver_accel_sigma", c.maneuver_accel_sigma}};
}

void from_json(const nlohmann::json& j, TrackerConfig& c) {
  c.dim = j.value("dim", c.dim);
  c.period = j.value("period", c.period);
  if (j.contains("modes")) {
    c.bank.modes.clear();
    for (const auto& m : j.at("modes")) {
      ModeModel mm;
      mm.mode = flight_mode_from_string(m.at("mode").get<std::string>());
      mm.turn_rate = m.value("turn_rate", 0.0);
      mm.period = c.period;
      const auto q = m.value("noise_intensity", std::vector<double>{0.05, 0.05, 0.05});
      mm.noise_intensity = Eigen::Vector3d(q.at(0), q.at(1), q.at(2));
      c.bank.modes.push_back(mm);
    }
  } else if (c.bank.modes.empty() || j.contains("bank_rate")) {
    c.bank = ImmBank::standard(c.dim, c.period, j.value("bank_rate", 0.2), j.value("stay", kTrackerStay),
                               j.value("maneuver_intensity", kTrackerManeuverIntensity));
  }
  if (j.contains("transition")) {
    const auto pi = j.at("transition").get<std::vector<std::vector<double>>>();
    c.bank.transition.resize(static_cast<Eigen::Index>(pi.size()), static_cast<Eigen::Index>(pi.size()));
    for (std::size_t r = 0; r < pi.size(); ++r) {
      for (std::size_t k = 0; k < pi[r].size(); ++k) {
        c.bank.transition(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = pi[r].at(k);
      }
    }
  } else if (c.bank.transition.rows() != static_cast<Eigen::Index>(c.bank.modes.size())) {
    c.bank.transition = ImmBank::markov(c.bank.modes.size(), j.value("stay", kTrackerStay));
  }
  c.gate_probability = j.value("gate_probability", c.gate_probability);
  c.init_inflation = j.value("init_inflation", c.init_inflation);
  c.init_accel_sigma = j.value("init_accel_sigma", c.init_accel_sigma);
  c.max_init_speed = j.value("max_init_speed", c.max_init_speed);
  c.max_coast = j.value("max_coast", c.max_coast);
  c.maneuver_gate = j.value("maneuver_gate", c.maneuver_gate);
  c.maneuver_velocity_sigma = j.value("maneuver_velocity_sigma", c.maneuver_velocity_sigma);
  c.maneuver_accel_sigma = j.value("maneuver_accel_sigma", c.maneuver_accel_sigma);
  c.bank.validate();
}

}  // namespace geointent
