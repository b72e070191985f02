#include "geointent/classifier.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace geointent {

Architecture Architecture::standard(int features, int window, int classes) {
  Architecture a;
  a.features = features;
  a.classes = classes;
  a.sub_window = 10;
  if (window % a.sub_window != 0) {
    throw std::invalid_argument("window length must be a multiple of 10 steps");
  }
  a.sub_windows = window / a.sub_window;
  return a;
}

void Architecture::validate() const {
  if (features <= 0 || sub_window <= 0 || sub_windows <= 0) throw std::invalid_argument("architecture sizes must be > 0");
  if (conv_filters <= 0 || kernel <= 0 || pool <= 0 || hidden <= 0 || dense <= 0) {
    throw std::invalid_argument("architecture layer widths must be > 0");
  }
  if (classes < 2) throw std::invalid_argument("classifier needs at least two classes");
  if (pooled_len() < 1) throw std::invalid_argument("sub-window too short for two convolutions and pooling");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0,1)");
  if (attention && attention_units <= 0) throw std::invalid_argument("attention_units must be > 0");
}

ParamLayout ParamLayout::of(const Architecture& a) {
  a.validate();
  ParamLayout p;
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t o = at;
    at += n;
    return o;
  };
  const std::size_t C = a.conv_filters, K = a.kernel, F = a.features, H = a.hidden;
  p.conv1_w = take(K * F * C);
  p.conv1_b = take(C);
  p.conv2_w = take(K * C * C);
  p.conv2_b = take(C);
  const std::size_t flat = a.flat_size();
  p.forward = {take(flat * 4 * H), take(H * 4 * H), take(4 * H)};
  if (a.bidirectional) p.backward = {take(flat * 4 * H), take(H * 4 * H), take(4 * H)};
  const std::size_t D = a.recurrent_out();
  if (a.attention) {
    p.att_w = take(D * a.attention_units);
    p.att_b = take(a.attention_units);
    p.att_v = take(a.attention_units);
  }
  p.dense_w = take(D * a.dense);
  p.dense_b = take(a.dense);
  p.out_w = take(a.dense * a.classes);
  p.out_b = take(a.classes);
  p.total = at;
  return p;
}

namespace {

using MapRM = Eigen::Map<RowMat>;
using CMapRM = Eigen::Map<const RowMat>;
using CMapV = Eigen::Map<const Eigen::RowVectorXd>;
using MapV = Eigen::Map<Eigen::RowVectorXd>;

CMapRM cmat(const Eigen::VectorXd& v, std::size_t off, Eigen::Index r, Eigen::Index c) {
  return CMapRM(v.data() + off, r, c);
}
CMapV cvec(const Eigen::VectorXd& v, std::size_t off, Eigen::Index n) { return CMapV(v.data() + off, n); }
MapRM mat(Eigen::VectorXd& v, std::size_t off, Eigen::Index r, Eigen::Index c) { return MapRM(v.data() + off, r, c); }
MapV vec(Eigen::VectorXd& v, std::size_t off, Eigen::Index n) { return MapV(v.data() + off, n); }

void fill_uniform(Eigen::VectorXd& v, std::size_t off, std::size_t n, double limit, Rng& rng) {
  std::uniform_real_distribution<double> u(-limit, limit);
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(off + i)] = u(rng);
}

void check_finite(const RowMat& m, const char* layer) {
  if (!m.allFinite()) throw NonFiniteActivation(layer);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmCache {
  RowMat xw;                         // (B*S) x 4H input projections
  std::vector<RowMat> i, f, g, o, c, tc, h;  // indexed by time step, B x H
};

struct Cache {
  int B = 0;
  RowMat col1, a1, col2, a2, mask, dropped, pooled;
  std::vector<Eigen::Index> argmax;  // row of `dropped` feeding each pooled cell
  LstmCache fwd, bwd;
  std::vector<RowMat> outputs;       // per time step, B x D
  std::vector<RowMat> att_u;         // per time step, B x A
  RowMat alpha;                      // B x S
  RowMat rep, dense_a, probs;
};

// Row (b*S + t) of `m` for every b.
RowMat gather_step(const RowMat& m, int B, int S, int t) {
  RowMat out(B, m.cols());
  for (int b = 0; b < B; ++b) out.row(b) = m.row(static_cast<Eigen::Index>(b) * S + t);
  return out;
}

void lstm_forward(const Architecture& a, const Eigen::VectorXd& v, const ParamLayout::Lstm& L, const RowMat& pooled,
                  int B, bool reverse, LstmCache& c) {
  const int S = a.sub_windows, H = a.hidden;
  const auto Wx = cmat(v, L.wx, a.flat_size(), 4 * H);
  const auto Wh = cmat(v, L.wh, H, 4 * H);
  const auto bias = cvec(v, L.b, 4 * H);
  c.xw.noalias() = pooled * Wx;
  for (auto* s : {&c.i, &c.f, &c.g, &c.o, &c.c, &c.tc, &c.h}) s->assign(S, RowMat());
  RowMat h_prev = RowMat::Zero(B, H), c_prev = RowMat::Zero(B, H);
  for (int k = 0; k < S; ++k) {
    const int t = reverse ? S - 1 - k : k;
    RowMat pre = gather_step(c.xw, B, S, t);
    pre.noalias() += h_prev * Wh;
    pre.rowwise() += bias;
    c.i[t] = pre.leftCols(H).unaryExpr(&sigmoid);
    c.f[t] = pre.middleCols(H, H).unaryExpr(&sigmoid);
    c.g[t] = pre.middleCols(2 * H, H).array().tanh();
    c.o[t] = pre.rightCols(H).unaryExpr(&sigmoid);
    c.c[t] = c.f[t].cwiseProduct(c_prev) + c.i[t].cwiseProduct(c.g[t]);
    c.tc[t] = c.c[t].array().tanh();
    c.h[t] = c.o[t].cwiseProduct(c.tc[t]);
    check_finite(c.h[t], "lstm");
    h_prev = c.h[t];
    c_prev = c.c[t];
  }
}

// Accumulates parameter gradients into `grad` and returns d(loss)/d(pooled).
RowMat lstm_backward(const Architecture& a, const Eigen::VectorXd& v, const ParamLayout::Lstm& L,
                     const RowMat& pooled, int B, bool reverse, const LstmCache& c,
                     const std::vector<RowMat>& dh_out, Eigen::VectorXd& grad) {
  const int S = a.sub_windows, H = a.hidden;
  const auto Wx = cmat(v, L.wx, a.flat_size(), 4 * H);
  const auto Wh = cmat(v, L.wh, H, 4 * H);
  auto dWh = mat(grad, L.wh, H, 4 * H);
  auto db = vec(grad, L.b, 4 * H);
  RowMat dxw = RowMat::Zero(static_cast<Eigen::Index>(B) * S, 4 * H);
  RowMat dh_next = RowMat::Zero(B, H), dc_next = RowMat::Zero(B, H);
  const RowMat zeros = RowMat::Zero(B, H);
  for (int k = S - 1; k >= 0; --k) {
    const int t = reverse ? S - 1 - k : k;
    const int tp = reverse ? t + 1 : t - 1;  // previous step in processing order
    const bool first = k == 0;
    const RowMat& h_prev = first ? zeros : c.h[tp];
    const RowMat& c_prev = first ? zeros : c.c[tp];
    const RowMat dh = dh_out[t] + dh_next;
    const RowMat dc = dc_next + dh.cwiseProduct(c.o[t]).cwiseProduct((1.0 - c.tc[t].array().square()).matrix());
    RowMat da(B, 4 * H);
    da.leftCols(H) = dc.cwiseProduct(c.g[t]).array() * c.i[t].array() * (1.0 - c.i[t].array());
    da.middleCols(H, H) = dc.cwiseProduct(c_prev).array() * c.f[t].array() * (1.0 - c.f[t].array());
    da.middleCols(2 * H, H) = dc.cwiseProduct(c.i[t]).array() * (1.0 - c.g[t].array().square());
    da.rightCols(H) = dh.cwiseProduct(c.tc[t]).array() * c.o[t].array() * (1.0 - c.o[t].array());
    dWh.noalias() += h_prev.transpose() * da;
    db += da.colwise().sum();
    dh_next.noalias() = da * Wh.transpose();
    dc_next = dc.cwiseProduct(c.f[t]);
    for (int b = 0; b < B; ++b) dxw.row(static_cast<Eigen::Index>(b) * S + t) = da.row(b);
  }
  auto dWx = mat(grad, L.wx, a.flat_size(), 4 * H);
  dWx.noalias() += pooled.transpose() * dxw;
  return dxw * Wx.transpose();
}

void check_window(const Architecture& a, const Eigen::MatrixXd& w) {
  if (w.rows() != a.window() || w.cols() != a.features) {
    std::ostringstream os;
    os << "window shape " << w.rows() << "x" << w.cols() << " does not match architecture " << a.window() << "x"
       << a.features;
    throw ShapeMismatch(os.str());
  }
}

void run_forward(const ClassifierParams& P, std::span<const Eigen::MatrixXd* const> windows, bool training, Rng* rng,
                 Cache& c) {
  const Architecture& a = P.arch;
  const ParamLayout L = ParamLayout::of(a);
  if (P.size() != L.total) throw ShapeMismatch("parameter vector size does not match architecture");
  if (training && a.dropout > 0.0 && rng == nullptr) throw std::invalid_argument("training mode needs an rng");
  const int B = static_cast<int>(windows.size());
  const int S = a.sub_windows, Ls = a.sub_window, F = a.features, C = a.conv_filters, K = a.kernel;
  const int l1 = a.conv1_len(), l2 = a.conv2_len(), lp = a.pooled_len();
  const Eigen::Index BS = static_cast<Eigen::Index>(B) * S;
  c.B = B;

  const bool standardize = P.input_mean.size() == F && P.input_scale.size() == F;
  c.col1.resize(BS * l1, K * F);
  for (int b = 0; b < B; ++b) {
    const Eigen::MatrixXd& w = *windows[static_cast<std::size_t>(b)];
    check_window(a, w);
    for (int s = 0; s < S; ++s) {
      for (int j = 0; j < l1; ++j) {
        const Eigen::Index r = (static_cast<Eigen::Index>(b) * S + s) * l1 + j;
        for (int k = 0; k < K; ++k) {
          const int t = s * Ls + j + k;
          for (int f = 0; f < F; ++f) {
            double x = w(t, f);
            if (standardize) x = (x - P.input_mean[f]) / P.input_scale[f];
            c.col1(r, k * F + f) = x;
          }
        }
      }
    }
  }
  check_finite(c.col1, "input");
  const auto& v = P.values;
  c.a1.noalias() = c.col1 * cmat(v, L.conv1_w, K * F, C);
  c.a1.rowwise() += cvec(v, L.conv1_b, C);
  c.a1 = c.a1.cwiseMax(0.0);
  check_finite(c.a1, "conv1");

  c.col2.resize(BS * l2, K * C);
  for (Eigen::Index q = 0; q < BS; ++q) {
    for (int j = 0; j < l2; ++j) {
      for (int k = 0; k < K; ++k) c.col2.block(q * l2 + j, k * C, 1, C) = c.a1.row(q * l1 + j + k);
    }
  }
  c.a2.noalias() = c.col2 * cmat(v, L.conv2_w, K * C, C);
  c.a2.rowwise() += cvec(v, L.conv2_b, C);
  c.a2 = c.a2.cwiseMax(0.0);
  check_finite(c.a2, "conv2");

  if (training && a.dropout > 0.0) {
    const double keep = 1.0 - a.dropout;
    c.mask.resize(c.a2.rows(), C);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Row-major fill keeps each batch element's mask a contiguous draw.
    for (Eigen::Index r = 0; r < c.mask.rows(); ++r) {
      for (int k = 0; k < C; ++k) c.mask(r, k) = u(*rng) < keep ? 1.0 / keep : 0.0;
    }
    c.dropped = c.a2.cwiseProduct(c.mask);
  } else {
    c.mask.resize(0, 0);
    c.dropped = c.a2;
  }

  c.pooled.resize(BS, static_cast<Eigen::Index>(lp) * C);
  c.argmax.assign(static_cast<std::size_t>(BS * lp * C), 0);
  for (Eigen::Index q = 0; q < BS; ++q) {
    for (int j = 0; j < lp; ++j) {
      for (int k = 0; k < C; ++k) {
        Eigen::Index best = q * l2 + j * a.pool;
        for (int m = 1; m < a.pool; ++m) {
          const Eigen::Index r = q * l2 + j * a.pool + m;
          if (c.dropped(r, k) > c.dropped(best, k)) best = r;
        }
        c.pooled(q, j * C + k) = c.dropped(best, k);
        c.argmax[static_cast<std::size_t>((q * lp + j) * C + k)] = best;
      }
    }
  }

  lstm_forward(a, v, L.forward, c.pooled, B, false, c.fwd);
  if (a.bidirectional) lstm_forward(a, v, L.backward, c.pooled, B, true, c.bwd);
  const int H = a.hidden, D = a.recurrent_out();
  c.outputs.assign(S, RowMat());
  for (int t = 0; t < S; ++t) {
    c.outputs[t].resize(B, D);
    c.outputs[t].leftCols(H) = c.fwd.h[t];
    if (a.bidirectional) c.outputs[t].rightCols(H) = c.bwd.h[t];
  }

  if (a.attention) {
    const int A = a.attention_units;
    const auto Wa = cmat(v, L.att_w, D, A);
    const auto ba = cvec(v, L.att_b, A);
    const auto va = cvec(v, L.att_v, A);
    c.att_u.assign(S, RowMat());
    c.alpha.resize(B, S);
    for (int t = 0; t < S; ++t) {
      RowMat pre = c.outputs[t] * Wa;
      pre.rowwise() += ba;
      c.att_u[t] = pre.array().tanh();
      c.alpha.col(t) = c.att_u[t] * va.transpose();
    }
    for (int b = 0; b < B; ++b) {
      const double mx = c.alpha.row(b).maxCoeff();
      c.alpha.row(b) = (c.alpha.row(b).array() - mx).exp();
      c.alpha.row(b) /= c.alpha.row(b).sum();
    }
    c.rep = RowMat::Zero(B, D);
    for (int t = 0; t < S; ++t) c.rep += c.alpha.col(t).asDiagonal() * c.outputs[t];
    check_finite(c.rep, "attention");
  } else {
    c.rep.resize(B, D);
    c.rep.leftCols(H) = c.fwd.h[S - 1];
    if (a.bidirectional) c.rep.rightCols(H) = c.bwd.h[0];
  }

  c.dense_a.noalias() = c.rep * cmat(v, L.dense_w, D, a.dense);
  c.dense_a.rowwise() += cvec(v, L.dense_b, a.dense);
  c.dense_a = c.dense_a.cwiseMax(0.0);
  check_finite(c.dense_a, "dense");

  RowMat logits = c.dense_a * cmat(v, L.out_w, a.dense, a.classes);
  logits.rowwise() += cvec(v, L.out_b, a.classes);
  check_finite(logits, "output");
  c.probs.resize(B, a.classes);
  for (int b = 0; b < B; ++b) c.probs.row(b) = softmax(logits.row(b).transpose()).transpose();
}

std::vector<const Eigen::MatrixXd*> windows_of(std::span<const Example> batch) {
  std::vector<const Eigen::MatrixXd*> w;
  w.reserve(batch.size());
  for (const auto& e : batch) {
    if (e.window == nullptr) throw std::invalid_argument("example without window");
    w.push_back(e.window);
  }
  return w;
}

}  // namespace

ClassifierParams ClassifierParams::zeros(const Architecture& arch) {
  ClassifierParams p;
  p.arch = arch;
  p.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ParamLayout::of(arch).total));
  p.input_mean = Eigen::VectorXd::Zero(arch.features);
  p.input_scale = Eigen::VectorXd::Ones(arch.features);
  return p;
}

ClassifierParams ClassifierParams::init(const Architecture& a, Rng& rng) {
  ClassifierParams p = zeros(a);
  const ParamLayout L = ParamLayout::of(a);
  const std::size_t C = a.conv_filters, K = a.kernel, H = a.hidden, D = a.recurrent_out();
  fill_uniform(p.values, L.conv1_w, K * a.features * C, std::sqrt(6.0 / double(K * a.features)), rng);
  fill_uniform(p.values, L.conv2_w, K * C * C, std::sqrt(6.0 / double(K * C)), rng);
  auto lstm = [&](const ParamLayout::Lstm& l) {
    const double lim = 1.0 / std::sqrt(double(H));
    fill_uniform(p.values, l.wx, a.flat_size() * 4 * H, std::sqrt(3.0 / double(a.flat_size())), rng);
    fill_uniform(p.values, l.wh, H * 4 * H, lim, rng);
    for (std::size_t k = 0; k < H; ++k) p.values[static_cast<Eigen::Index>(l.b + H + k)] = 1.0;
  };
  lstm(L.forward);
  if (a.bidirectional) lstm(L.backward);
  if (a.attention) {
    fill_uniform(p.values, L.att_w, D * a.attention_units, std::sqrt(3.0 / double(D)), rng);
    fill_uniform(p.values, L.att_v, a.attention_units, std::sqrt(3.0 / double(a.attention_units)), rng);
  }
  fill_uniform(p.values, L.dense_w, D * a.dense, std::sqrt(6.0 / double(D)), rng);
  fill_uniform(p.values, L.out_w, a.dense * a.classes, std::sqrt(3.0 / double(a.dense)), rng);
  return p;
}

Eigen::MatrixXd forward_batch(const ClassifierParams& params, std::span<const Eigen::MatrixXd* const> windows,
                              bool training, Rng* rng) {
  if (windows.empty()) return Eigen::MatrixXd(0, params.arch.classes);
  Cache c;
  run_forward(params, windows, training, rng, c);
  return c.probs;
}

Eigen::VectorXd forward(const ClassifierParams& params, const Eigen::MatrixXd& window, bool training, Rng* rng) {
  const Eigen::MatrixXd* w[] = {&window};
  return forward_batch(params, w, training, rng).row(0).transpose();
}

double batch_loss(const ClassifierParams& params, std::span<const Example> batch, const LossConfig& loss, Rng* rng) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const auto w = windows_of(batch);
  Cache c;
  run_forward(params, w, rng != nullptr, rng, c);
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Label y = Label::of(batch[b].label, params.arch.classes);
    total += loss_value(loss, y.one_hot, c.probs.row(static_cast<Eigen::Index>(b)).transpose(), batch[b].tau,
                        batch[b].t_int);
  }
  return total / static_cast<double>(batch.size());
}

GradientResult gradient(const ClassifierParams& P, std::span<const Example> batch, const LossConfig& loss, Rng* rng) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const Architecture& a = P.arch;
  const ParamLayout L = ParamLayout::of(a);
  const auto w = windows_of(batch);
  Cache c;
  run_forward(P, w, rng != nullptr, rng, c);
  const int B = c.B, S = a.sub_windows, C = a.conv_filters, K = a.kernel, H = a.hidden, D = a.recurrent_out();
  const int l1 = a.conv1_len(), l2 = a.conv2_len(), lp = a.pooled_len();
  const Eigen::Index BS = static_cast<Eigen::Index>(B) * S;
  const auto& v = P.values;

  GradientResult out;
  out.gradient = Eigen::VectorXd::Zero(v.size());
  auto& g = out.gradient;
  out.posteriors = c.probs;

  RowMat dlogits(B, a.classes);
  for (int b = 0; b < B; ++b) {
    const Label y = Label::of(batch[b].label, a.classes);
    const Eigen::VectorXd p = c.probs.row(b).transpose();
    out.loss += loss_value(loss, y.one_hot, p, batch[b].tau, batch[b].t_int);
    dlogits.row(b) = loss_grad_logits(loss, y.one_hot, p).transpose() / static_cast<double>(B);
  }
  out.loss /= static_cast<double>(B);

  mat(g, L.out_w, a.dense, a.classes).noalias() += c.dense_a.transpose() * dlogits;
  vec(g, L.out_b, a.classes) += dlogits.colwise().sum();
  RowMat dz = dlogits * cmat(v, L.out_w, a.dense, a.classes).transpose();
  dz = dz.cwiseProduct((c.dense_a.array() > 0.0).cast<double>().matrix());
  mat(g, L.dense_w, D, a.dense).noalias() += c.rep.transpose() * dz;
  vec(g, L.dense_b, a.dense) += dz.colwise().sum();
  const RowMat drep = dz * cmat(v, L.dense_w, D, a.dense).transpose();

  std::vector<RowMat> dout(S, RowMat::Zero(B, D));
  if (a.attention) {
    const int A = a.attention_units;
    const auto Wa = cmat(v, L.att_w, D, A);
    const auto va = cvec(v, L.att_v, A);
    RowMat dalpha(B, S);
    for (int t = 0; t < S; ++t) {
      dout[t] = c.alpha.col(t).asDiagonal() * drep;
      dalpha.col(t) = drep.cwiseProduct(c.outputs[t]).rowwise().sum();
    }
    const Eigen::VectorXd avg = c.alpha.cwiseProduct(dalpha).rowwise().sum();
    const RowMat de = c.alpha.cwiseProduct(dalpha - avg.replicate(1, S));
    auto dWa = mat(g, L.att_w, D, A);
    auto dba = vec(g, L.att_b, A);
    auto dva = vec(g, L.att_v, A);
    for (int t = 0; t < S; ++t) {
      dva += de.col(t).transpose() * c.att_u[t];
      RowMat dpre = de.col(t) * va;
      dpre = dpre.cwiseProduct((1.0 - c.att_u[t].array().square()).matrix());
      dWa.noalias() += c.outputs[t].transpose() * dpre;
      dba += dpre.colwise().sum();
      dout[t].noalias() += dpre * Wa.transpose();
    }
  } else {
    dout[S - 1].leftCols(H) = drep.leftCols(H);
    if (a.bidirectional) dout[0].rightCols(H) = drep.rightCols(H);
  }

  std::vector<RowMat> dh(S);
  for (int t = 0; t < S; ++t) dh[t] = dout[t].leftCols(H);
  RowMat dpooled = lstm_backward(a, v, L.forward, c.pooled, B, false, c.fwd, dh, g);
  if (a.bidirectional) {
    for (int t = 0; t < S; ++t) dh[t] = dout[t].rightCols(H);
    dpooled += lstm_backward(a, v, L.backward, c.pooled, B, true, c.bwd, dh, g);
  }

  RowMat da2 = RowMat::Zero(BS * l2, C);
  for (Eigen::Index q = 0; q < BS; ++q) {
    for (int j = 0; j < lp; ++j) {
      for (int k = 0; k < C; ++k) {
        da2(c.argmax[static_cast<std::size_t>((q * lp + j) * C + k)], k) += dpooled(q, j * C + k);
      }
    }
  }
  if (c.mask.size() > 0) da2 = da2.cwiseProduct(c.mask);
  da2 = da2.cwiseProduct((c.a2.array() > 0.0).cast<double>().matrix());
  mat(g, L.conv2_w, K * C, C).noalias() += c.col2.transpose() * da2;
  vec(g, L.conv2_b, C) += da2.colwise().sum();
  const RowMat dcol2 = da2 * cmat(v, L.conv2_w, K * C, C).transpose();
  RowMat da1 = RowMat::Zero(BS * l1, C);
  for (Eigen::Index q = 0; q < BS; ++q) {
    for (int j = 0; j < l2; ++j) {
      for (int k = 0; k < K; ++k) da1.row(q * l1 + j + k) += dcol2.block(q * l2 + j, k * C, 1, C);
    }
  }
  da1 = da1.cwiseProduct((c.a1.array() > 0.0).cast<double>().matrix());
  mat(g, L.conv1_w, K * a.features, C).noalias() += c.col1.transpose() * da1;
  vec(g, L.conv1_b, C) += da1.colwise().sum();

  if (!g.allFinite()) throw NonFiniteActivation("gradient");
  return out;
}

void to_json(nlohmann::json& j, const Architecture& a) {
  j = nlohmann::json{{"features", a.features},       {"sub_window", a.sub_window},
                     {"sub_windows", a.sub_windows}, {"conv_filters", a.conv_filters},
                     {"kernel", a.kernel},           {"pool", a.pool},
                     {"hidden", a.hidden},           {"dense", a.dense},
                     {"classes", a.classes},         {"dropout", a.dropout},
                     {"bidirectional", a.bidirectional}, {"attention", a.attention},
                     {"attention_units", a.attention_units}};
}

void from_json(const nlohmann::json& j, Architecture& a) {
  const Architecture d;
  a.features = j.value("features", d.features);
  a.sub_window = j.value("sub_window", d.sub_window);
  a.sub_windows = j.value("sub_windows", d.sub_windows);
  a.conv_filters = j.value("conv_filters", d.conv_filters);
  a.kernel = j.value("kernel", d.kernel);
  a.pool = j.value("pool", d.pool);
  a.hidden = j.value("hidden", d.hidden);
  a.dense = j.value("dense", d.dense);
  a.classes = j.value("classes", d.classes);
  a.dropout = j.value("dropout", d.dropout);
  a.bidirectional = j.value("bidirectional", d.bidirectional);
  a.attention = j.value("attention", d.attention);
  a.attention_units = j.value("attention_units", d.attention_units);
}

namespace {

constexpr const char* kFormat = "geointent-classifier";
constexpr int kFormatVersion = 1;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void write_params(std::ostream& os, const ClassifierParams& p) {
  nlohmann::json header{{"format", kFormat},
                        {"version", kFormatVersion},
                        {"architecture", p.arch},
                        {"labels", p.labels},
                        {"input_mean", to_vec(p.input_mean)},
                        {"input_scale", to_vec(p.input_scale)},
                        {"count", p.values.size()}};
  os << header.dump() << '\n';
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < p.values.size(); ++i) os << p.values[i] << '\n';
}

ClassifierParams read_params(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty parameter file");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", std::string()) != kFormat) throw std::runtime_error("not a classifier parameter file");
  if (header.at("version").get<int>() != kFormatVersion) throw std::runtime_error("unsupported parameter file version");
  ClassifierParams p = ClassifierParams::zeros(header.at("architecture").get<Architecture>());
  p.labels = header.value("labels", std::vector<std::string>{});
  const auto mean = header.at("input_mean").get<std::vector<double>>();
  const auto scale = header.at("input_scale").get<std::vector<double>>();
  p.input_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  p.input_scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  const auto count = header.at("count").get<Eigen::Index>();
  if (count != p.values.size()) throw std::runtime_error("parameter count does not match architecture");
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("truncated parameter file");
    p.values[i] = std::stod(line);
  }
  return p;
}

}  // namespace geointent
