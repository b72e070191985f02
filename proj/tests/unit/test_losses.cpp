#include "geointent/losses.hpp"
#include "geointent/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace geointent;

namespace {

Eigen::VectorXd random_simplex(Rng& rng, int k) {
  Eigen::VectorXd logits(k);
  for (int i = 0; i < k; ++i) logits[i] = normal(rng, 2.0);
  return softmax(logits);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LossConfig afl(Eigen::VectorXd gamma) {
  LossConfig c;
  c.kind = LossKind::AFL;
  c.gamma = std::move(gamma);
  return c;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("cross entropy of a uniform binary posterior") {
  CHECK(loss_cce(vec({1, 0}), vec({0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("cross entropy values") {
  CHECK(loss_cce(vec({0, 1, 0}), vec({0.2, 0.7, 0.1})) == doctest::Approx(-std::log(0.7)));
  CHECK(loss_cce(vec({0, 1}), vec({1, 0})) == doctest::Approx(-std::log(kLogClamp)));
  CHECK(std::isfinite(loss_cce(vec({0, 1}), vec({1, 0}))));
  CHECK_THROWS_AS(loss_cce(vec({0, 1}), vec({1, 0, 0})), std::invalid_argument);
}

TEST_CASE("AFL with zero focusing is cross entropy") {
  Rng rng(1);
  for (int t = 0; t < 10000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 5);
    const Eigen::VectorXd p = random_simplex(rng, k);
    const Label y = Label::of(static_cast<int>(rng() % static_cast<unsigned>(k)), k);
    CHECK(loss_afl(y.one_hot, p, Eigen::VectorXd::Zero(k)) == loss_cce(y.one_hot, p));
  }
}

TEST_CASE("AFL focusing down-weights confident examples") {
  const Eigen::VectorXd y = vec({1, 0});
  const Eigen::VectorXd p = vec({0.9, 0.1});
  CHECK(loss_afl(y, p, vec({2, 0})) == doctest::Approx(-0.01 * std::log(0.9)));
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd q = random_simplex(rng, 3);
    const Label l = Label::of(static_cast<int>(rng() % 3), 3);
    double prev = loss_afl(l.one_hot, q, Eigen::VectorXd::Zero(3));
    for (double g : {0.5, 1.0, 2.0, 5.0}) {
      const double cur = loss_afl(l.one_hot, q, Eigen::VectorXd::Constant(3, g));
      CHECK(cur <= prev + 1e-15);
      CHECK(cur >= 0.0);
      prev = cur;
    }
  }
}

TEST_CASE("time-constrained loss reductions") {
  Rng rng(3);
  for (int t = 0; t < 10000; ++t) {
    const Eigen::VectorXd p = random_simplex(rng, 3);
    const Eigen::VectorXd y = Label::of(static_cast<int>(rng() % 3), 3).one_hot;
    const double tau = uniform(rng, 0.0, 100.0);
    const double t_int = uniform(rng, 1.0, 200.0);
    CHECK(loss_time_constrained(y, p, tau, t_int, 1.0) == loss_cce(y, p));
    CHECK(loss_time_constrained(y, p, tau, t_int, 0.0) == doctest::Approx(tau / t_int).epsilon(1e-15));
    CHECK(loss_time_constrained(y, p, tau, std::numeric_limits<double>::infinity(), 0.3) == doctest::Approx(0.3 * loss_cce(y, p)));
  }
  CHECK_THROWS_AS(loss_time_constrained(vec({1, 0}), vec({0.5, 0.5}), 1.0, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(loss_time_constrained(vec({1, 0}), vec({0.5, 0.5}), 1.0, 5.0, 1.5), std::invalid_argument);
}

TEST_CASE("logit gradients match finite differences") {
  Rng rng(4);
  std::vector<LossConfig> configs{LossConfig{}, afl(vec({0.0, 1.0, 2.5})), afl(vec({0.5, 0.5, 0.5}))};
  LossConfig tc;
  tc.kind = LossKind::TimeConstrained;
  tc.alpha = 0.4;
  configs.push_back(tc);
  for (const auto& cfg : configs) {
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd z(3);
      for (int i = 0; i < 3; ++i) z[i] = normal(rng, 1.5);
      const Eigen::VectorXd y = Label::of(static_cast<int>(rng() % 3), 3).one_hot;
      const Eigen::VectorXd g = loss_grad_logits(cfg, y, softmax(z));
      for (int i = 0; i < 3; ++i) {
        const double h = 1e-6;
        Eigen::VectorXd zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (loss_value(cfg, y, softmax(zp), 2.0, 10.0) - loss_value(cfg, y, softmax(zm), 2.0, 10.0)) /
                          (2 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-8));
      }
    }
  }
}

TEST_CASE("softmax") {
  const Eigen::VectorXd p = softmax(vec({1000, 1000, -1000}));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[2] == 0.0);
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd z(4);
    for (int i = 0; i < 4; ++i) z[i] = normal(rng, 30.0);
    const Eigen::VectorXd q = softmax(z);
    CHECK(std::abs(q.sum() - 1.0) < 1e-12);
    CHECK(softmax((z.array() + 7.0).matrix()).isApprox(q, 1e-12));
  }
}

TEST_CASE("expected misclassification cost") {
  Eigen::MatrixXd counts(2, 2);
  counts << 8, 2, 1, 9;
  Eigen::MatrixXd cost(2, 2);
  cost << 0, 1, 5, 0;
  CHECK(expected_misclassification_cost(counts, cost) == doctest::Approx((2.0 + 5.0) / 20.0));
  CHECK(expected_misclassification_cost(Eigen::MatrixXd::Zero(2, 2), cost) == 0.0);
  CHECK(expected_misclassification_cost(Eigen::MatrixXd::Identity(2, 2) * 4, cost) == 0.0);
  CHECK_THROWS_AS(expected_misclassification_cost(Eigen::MatrixXd::Zero(3, 3), cost), std::invalid_argument);
}

TEST_CASE("intrusion cost metric") {
  std::vector<IntrusionRecord> r{{0, true}, {0, false}, {0, true}, {0, true}, {1, false}, {1, true}, {2, false}};
  CHECK(intrusion_cost_metric(r, vec({1, 0, 0})) == 0.75);
  CHECK(intrusion_cost_metric(r, vec({2, 4, 7})) == doctest::Approx(2 * 0.75 + 4 * 0.5));
  CHECK(intrusion_cost_metric({}, vec({1, 1})) == 0.0);
  CHECK_THROWS_AS(intrusion_cost_metric({{3, true}}, vec({1, 1})), std::out_of_range);
}

TEST_CASE("loss config validation and JSON") {
  LossConfig c = afl(vec({1, 2}));
  CHECK_NOTHROW(c.validate(2));
  CHECK_THROWS_AS(c.validate(3), std::invalid_argument);
  c.gamma[0] = -1;
  CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
  LossConfig m;
  m.cost_matrix = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(m.validate(2), std::invalid_argument);
  m.cost_matrix.diagonal().setZero();
  CHECK_NOTHROW(m.validate(2));

  LossConfig t;
  t.kind = LossKind::TimeConstrained;
  t.alpha = 0.25;
  t.intrusion_costs = vec({1, 0, 0});
  const LossConfig back = nlohmann::json(t).get<LossConfig>();
  CHECK(back.kind == LossKind::TimeConstrained);
  CHECK(back.alpha == 0.25);
  CHECK(back.intrusion_costs == t.intrusion_costs);
  CHECK(loss_kind_from_string("afl") == LossKind::AFL);
  CHECK_THROWS_AS(loss_kind_from_string("hinge"), std::invalid_argument);
  CHECK(Label::of(2, 3).index() == 2);
  CHECK_THROWS_AS(Label::of(3, 3), std::out_of_range);
}

}  // TEST_SUITE
