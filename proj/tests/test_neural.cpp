#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sctl/neural/adam.hpp"
#include "sctl/neural/checkpoint.hpp"
#include "sctl/neural/gaussian_actor.hpp"
#include "sctl/neural/mlp.hpp"

using namespace sctl;
using Mat = Matrix<double>;
using Vec = Vector<double>;
using Row = Eigen::RowVectorXd;

namespace {

Mat random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// max_i |a_i - b_i| / max(|b|_inf, tiny)
double rel_error(const Vec& a, const Vec& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("forward: zero network, affine layer, leaky slope") {
  Mlp<double> zero({3, 4, 2});
  Rng rng(1);
  CHECK(zero.forward(random_matrix(3, 5, rng)).cwiseAbs().maxCoeff() == 0.0);

  Mlp<double> affine({1, 1});
  affine.weight(0)(0, 0) = 2.0;
  affine.bias(0)(0) = 1.0;
  CHECK(affine.forward(Mat::Constant(1, 1, 3.0))(0, 0) == 7.0);

  Mlp<double> leaky({1, 1, 1});
  leaky.weight(0)(0, 0) = 1.0;
  leaky.weight(1)(0, 0) = 1.0;
  CHECK(leaky.forward(Mat::Constant(1, 1, -1.0))(0, 0) == doctest::Approx(-0.01).epsilon(1e-15));

  CHECK_THROWS_AS(zero.forward(Mat::Zero(2, 1)), ShapeError);
}

TEST_CASE("parameter layout: weights column-major then bias, per layer") {
  Mlp<double> net({2, 3, 1});
  CHECK(net.param_count() == 2 * 3 + 3 + 3 * 1 + 1);
  net.params().setLinSpaced(net.param_count(), 0.0, net.param_count() - 1.0);
  CHECK(net.weight(0)(1, 0) == 1.0);  // second row, first column
  CHECK(net.weight(0)(0, 1) == 3.0);
  CHECK(net.bias(0)(0) == 6.0);
  CHECK(net.weight(1)(0, 0) == 9.0);
  CHECK(net.bias(1)(0) == 12.0);
}

TEST_CASE("network gradients match central finite differences") {
  Rng rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    Mlp<double> net({4, 6, 5, 3});
    net.initialize(rng);
    const Mat x = random_matrix(4, 3, rng);
    const Mat up = random_matrix(3, 3, rng);
    Mat dx;
    const Vec g = net.grad(x, up, &dx);

    auto objective = [&](const Mlp<double>& n, const Mat& in) { return (n.forward(in).cwiseProduct(up)).sum(); };
    const double h = 1e-6;
    Vec fd(net.param_count());
    for (Eigen::Index i = 0; i < net.param_count(); ++i) {
      Mlp<double> p = net, m = net;
      p.params()(i) += h;
      m.params()(i) -= h;
      fd(i) = (objective(p, x) - objective(m, x)) / (2 * h);
    }
    CHECK(rel_error(g, fd) < 1e-6);

    Vec fdx(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Mat p = x, m = x;
      p.data()[i] += h;
      m.data()[i] -= h;
      fdx(i) = (objective(net, p) - objective(net, m)) / (2 * h);
    }
    CHECK(rel_error(Eigen::Map<const Vec>(dx.data(), dx.size()), fdx) < 1e-6);
  }
}

TEST_CASE("gradient linearity and zero upstream") {
  Rng rng(5);
  Mlp<double> net({3, 4, 2});
  net.initialize(rng);
  const Mat x1 = random_matrix(3, 1, rng), x2 = random_matrix(3, 1, rng);
  const Mat up = random_matrix(2, 1, rng);
  CHECK(net.grad(x1, Mat::Zero(2, 1)).cwiseAbs().maxCoeff() == 0.0);
  Mat both(3, 2);
  both << x1, x2;
  Mat up2(2, 2);
  up2 << up, up;
  const Vec sum = net.grad(x1, up) + net.grad(x2, up);
  CHECK((net.grad(both, up2) - sum).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adam: zero gradient, first step magnitude, determinism") {
  Vec p = Vec::Constant(3, 0.5);
  AdamState<double> st(3, 1e-3);
  adam_step<double>(p, Vec::Zero(3), st);
  CHECK((p.array() == 0.5).all());

  Vec q = Vec::Zero(3);
  AdamState<double> s2(3, 1e-3);
  Vec g(3);
  g << 2.0, -0.5, 1e-3;
  adam_step<double>(q, g, s2);
  for (int i = 0; i < 3; ++i) {
    // m_hat = g, v_hat = g^2 -> step = lr |g| / (|g| + eps)
    const double expected = -1e-3 * g(i) / (std::abs(g(i)) + 1e-8);
    CHECK(q(i) == doctest::Approx(expected).epsilon(1e-9));
  }

  Vec a = Vec::Constant(3, 1.0), b = a;
  AdamState<double> sa(3, 1e-2), sb(3, 1e-2);
  for (int k = 0; k < 5; ++k) {
    adam_step<double>(a, g * (k + 1), sa);
    adam_step<double>(b, g * (k + 1), sb);
  }
  CHECK(a == b);
  CHECK_THROWS_AS(adam_step<double>(a, Vec::Zero(2), sa), ShapeError);
}

namespace {

// Actor whose trunk ignores the input: mean = mu, log-std = ls.
GaussianActor<double> constant_actor(double mu, double ls) {
  Mlp<double> trunk({1, 2});
  trunk.bias(0)(0) = mu;
  trunk.bias(0)(1) = ls;
  return GaussianActor<double>(trunk);
}

}  // namespace

TEST_CASE("actor sample plug-in values") {
  const auto actor = constant_actor(0.0, 0.3);
  const auto s = actor.sample(Mat::Zero(1, 1), Row::Zero(1));
  CHECK(s.action(0) == 0.0);
  const double expected = -0.5 * std::log(2 * std::numbers::pi) - 0.3 - std::log(1.0 + 1e-6);
  CHECK(s.log_prob(0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("squashed density integrates to one") {
  const double mu = 0.3, ls = std::log(0.6);
  const auto actor = constant_actor(mu, ls);
  const int n = 200000;
  const double sigma = std::exp(ls);
  double integral = 0.0;
  Row noise(n);
  for (int i = 0; i < n; ++i) {
    const double a = -1.0 + (i + 0.5) * (2.0 / n);
    noise(i) = (std::atanh(a) - mu) / sigma;
  }
  const auto s = actor.sample(Mat::Zero(1, n), noise);
  for (int i = 0; i < n; ++i) integral += std::exp(s.log_prob(i)) * (2.0 / n);
  CHECK(std::abs(integral - 1.0) < 1e-3);
}

TEST_CASE("log-std clamp: vanishing spread and bounded actions") {
  const auto actor = constant_actor(0.7, -50.0);
  Rng rng(4);
  const auto s = actor.sample(Mat::Zero(1, 50), Row::NullaryExpr(50, [&] { return rng.normal(); }));
  CHECK(s.log_std(0) == -20.0);
  for (int i = 0; i < 50; ++i) CHECK(std::abs(s.action(i) - std::tanh(0.7)) < 1e-8);

  const auto wide = constant_actor(0.0, 10.0);
  const auto w = wide.sample(Mat::Zero(1, 1000), Row::NullaryExpr(1000, [&] { return 5.0 * rng.normal(); }));
  CHECK(w.log_std(0) == 2.0);
  CHECK(w.action.allFinite());
  CHECK(w.action.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("actor gradients match finite differences") {
  Rng rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    GaussianActor<double> actor(3, {5, 4});
    actor.trunk().initialize(rng);
    const Mat s = random_matrix(3, 4, rng);
    const Row noise = random_matrix(1, 4, rng);
    const Row da = random_matrix(1, 4, rng), dlp = random_matrix(1, 4, rng);
    const auto sample = actor.sample(s, noise);
    Vec g = Vec::Zero(actor.trunk().param_count());
    actor.backward(sample, da, dlp, g);

    auto objective = [&](const GaussianActor<double>& a) {
      const auto x = a.sample(s, noise);
      return x.action.dot(da) + x.log_prob.dot(dlp);
    };
    const double h = 1e-6;
    Vec fd(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      auto p = actor, m = actor;
      p.trunk().params()(i) += h;
      m.trunk().params()(i) -= h;
      fd(i) = (objective(p) - objective(m)) / (2 * h);
    }
    CHECK(rel_error(g, fd) < 1e-6);
  }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  Rng rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    Mlp<double> net({static_cast<Eigen::Index>(1 + rng.index(6)), static_cast<Eigen::Index>(1 + rng.index(9)), 2});
    net.initialize(rng);
    AdamState<double> st(net.param_count(), 3e-4);
    adam_step<double>(net.params(), Vec::NullaryExpr(net.param_count(), [&] { return rng.normal(); }), st);

    std::stringstream buf;
    write_checkpoint(buf, net, &st);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 5) == "SCTL1");

    AdamState<double> st2;
    std::stringstream in(bytes);
    const auto back = read_checkpoint<double>(in, &st2);
    CHECK(back.sizes() == net.sizes());
    CHECK(back.params() == net.params());
    CHECK(st2.m == st.m);
    CHECK(st2.v == st.v);
    CHECK(st2.step == st.step);

    std::stringstream again;
    write_checkpoint(again, back, &st2);
    CHECK(again.str() == bytes);
  }

  // float networks widen and narrow exactly
  Mlp<float> f({3, 4, 2});
  Rng r2(3);
  f.initialize(r2);
  std::stringstream fb;
  write_checkpoint(fb, f);
  CHECK(read_checkpoint<float>(fb).params() == f.params());
}

TEST_CASE("checkpoint header is little-endian and validated") {
  Mlp<double> net({1, 1});
  net.params() << 1.0, 0.0;
  std::stringstream buf;
  write_checkpoint(buf, net);
  const std::string b = buf.str();
  // magic, u32 count = 2
  CHECK(b.substr(0, 9) == std::string("SCTL1\x02\x00\x00\x00", 9));
  std::stringstream bad("SCTL2....");
  CHECK_THROWS_AS(read_checkpoint<double>(bad), InputError);
  std::stringstream truncated(b.substr(0, b.size() - 4));
  CHECK_THROWS_AS(read_checkpoint<double>(truncated), InputError);
}
