#include <doctest.h>

#include <cmath>
#include <random>

#include "ddvi/net.hpp"
#include "test_support.hpp"

using namespace ddvi;

namespace {

NetArchitecture arch(std::vector<std::size_t> widths, Activation a) {
  NetArchitecture ar;
  ar.hidden_widths = std::move(widths);
  ar.activation = a;
  return ar;
}

}  // namespace

TEST_CASE("init_params counts, zero biases and determinism") {
  const auto a = arch({32}, Activation::relu);
  CHECK(a.parameter_count() == 129);

  const auto deep = arch({32, 32, 32, 32}, Activation::relu);
  const auto p1 = init_params(deep, 7);
  const auto p2 = init_params(deep, 7);
  CHECK(p1.theta == p2.theta);
  CHECK(init_params(deep, 8).theta != p1.theta);

  for (std::size_t l = 0; l < deep.layer_count(); ++l) {
    const auto fi = deep.fan_in(l), fo = deep.fan_out(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(fi + fo));
    const double* w = p1.theta.data() + deep.offset(l);
    for (std::size_t i = 0; i < fi * fo; ++i) CHECK(std::abs(w[i]) <= limit);
    for (std::size_t i = 0; i < fo; ++i) CHECK(w[fi * fo + i] == 0.0);
  }
}

TEST_CASE("architecture validation") {
  NetArchitecture a;
  a.hidden_widths = {};
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a.hidden_widths = {4, 0};
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a.hidden_widths = {4};
  a.output_dim = 2;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}

TEST_CASE("forward of zero parameters is zero with zero gradient") {
  NetworkParams p{arch({8, 8}, Activation::tanh), {}};
  p.theta.assign(p.arch.parameter_count(), 0.0);
  CHECK(forward(p, {0.3, -0.7}) == 0.0);
  const auto g = forward_with_input_grad(p, {0.3, -0.7});
  CHECK(g.u == 0.0);
  CHECK(g.u_x == 0.0);
  CHECK(g.u_y == 0.0);
}

TEST_CASE("forward matches a hand-evaluated one-unit relu net") {
  // hidden: z = 1*x + 1*y + 0, output: 2*relu(z) + 0.5
  NetworkParams p{arch({1}, Activation::relu), {1.0, 1.0, 0.0, 2.0, 0.5}};
  CHECK(forward(p, {0.25, 0.5}) == doctest::Approx(2.0 * 0.75 + 0.5));
  CHECK(forward(p, {-0.5, 0.25}) == doctest::Approx(0.5));
  const auto g = forward_with_input_grad(p, {0.25, 0.5});
  CHECK(g.u_x == doctest::Approx(2.0));
  CHECK(g.u_y == doctest::Approx(2.0));
  CHECK(forward(p, {0.1, 0.2}) == forward(p, {0.1, 0.2}));
}

TEST_CASE("forward rejects non-finite input") {
  const auto p = init_params(arch({4}, Activation::tanh), 1);
  CHECK_THROWS_AS(forward(p, {std::nan(""), 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(forward(p, {0.0, INFINITY}), std::invalid_argument);
}

TEST_CASE("input gradient matches central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  SUBCASE("tanh, step 1e-5, relative error < 1e-6") {
    const auto p = init_params(arch({16, 16}, Activation::tanh), 3);
    for (int k = 0; k < 100; ++k) {
      const Point x{u(rng), u(rng)};
      const auto g = forward_with_input_grad(p, x);
      const auto fd = test::fd_input_grad(p, x, 1e-5);
      CHECK(test::rel_err(g.u_x, fd.first) < 1e-6);
      CHECK(test::rel_err(g.u_y, fd.second) < 1e-6);
    }
  }
  SUBCASE("relu, step 1e-6, relative error < 1e-4 away from kinks") {
    const auto p = init_params(arch({32, 32, 32, 32}, Activation::relu), 3);
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
      const Point x{u(rng), u(rng)};
      const auto g = forward_with_input_grad(p, x);
      const auto fd = test::fd_input_grad(p, x, 1e-6);
      CHECK(test::rel_err(g.u_x, fd.first) < 1e-4);
      CHECK(test::rel_err(g.u_y, fd.second) < 1e-4);
      ++checked;
    }
    CHECK(checked == 100);
  }
}

TEST_CASE("param_gradient of a Ritz-type loss matches central differences") {
  // loss = sum_i 1/2 (u_x^2 + u_y^2) - f_i u over 16 fixed points, tanh net.
  const auto p = init_params(arch({8, 8}, Activation::tanh), 5);
  const auto pts = test::random_points(16, 21);
  std::vector<double> f(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) f[i] = std::sin(3.0 * pts[i].x) + pts[i].y;

  const auto closure = test::ritz_like_closure(pts, f);
  const auto lg = param_gradient(p, closure);
  const auto fd = test::fd_param_grad(p, closure, 1e-5);
  CHECK(test::max_rel_err(lg.gradient, fd) < 1e-4);
}

TEST_CASE("param_gradient is linear in the loss and zero through zero activations") {
  const auto p = init_params(arch({8, 8}, Activation::tanh), 9);
  const auto pts = test::random_points(10, 3);
  std::vector<double> f(pts.size(), 1.0);
  const auto base = test::ritz_like_closure(pts, f);
  // Recording the same loss twice doubles every seed.
  const LossClosure twice = [&](GradientTape& t) { return base(t) + base(t); };
  const auto g1 = param_gradient(p, base);
  const auto g2 = param_gradient(p, twice);
  CHECK(g2.loss == doctest::Approx(2.0 * g1.loss));
  for (std::size_t i = 0; i < g1.gradient.size(); ++i) CHECK(g2.gradient[i] == doctest::Approx(2.0 * g1.gradient[i]).epsilon(1e-13));

  NetworkParams z{p.arch, std::vector<double>(p.theta.size(), 0.0)};
  const Point x0[1] = {{0.2, 0.4}};
  const auto g0 = param_gradient(z, [&](GradientTape& t) {
    auto& b = t.record(x0, false);
    b.seed_u(0) = 2.0 * b.u()(0);
    return b.u()(0) * b.u()(0);
  });
  for (double v : g0.gradient) CHECK(v == 0.0);
}

TEST_CASE("param_gradient reports non-finite losses") {
  const auto p = init_params(arch({4}, Activation::tanh), 1);
  CHECK_THROWS_AS(param_gradient(p, [](GradientTape&) { return std::nan(""); }), NonFiniteLoss);
}

TEST_CASE("bias-free relu net is invariant under hidden/output rescaling") {
  auto p = init_params(arch({6}, Activation::relu), 4);
  const auto& a = p.arch;
  const double c = 3.7;
  auto q = p;
  double* w0 = q.theta.data() + a.offset(0);
  for (std::size_t i = 0; i < a.fan_in(0) * a.fan_out(0); ++i) w0[i] *= c;
  double* w1 = q.theta.data() + a.offset(1);
  for (std::size_t i = 0; i < a.fan_in(1) * a.fan_out(1); ++i) w1[i] /= c;
  for (const auto& x : test::random_points(20, 8)) {
    CHECK(forward(q, x) == doctest::Approx(forward(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("adam_step") {
  NetworkParams p{arch({1}, Activation::relu), {0.5, -0.25, 0.0, 1.0, 0.0}};
  SUBCASE("zero gradient leaves theta unchanged") {
    auto s = AdamState::fresh(p.theta.size());
    const auto before = p.theta;
    adam_step(s, p, std::vector<double>(p.theta.size(), 0.0));
    CHECK(p.theta == before);
    CHECK(s.t == 1);
  }
  SUBCASE("first step moves each coordinate by about lr against the gradient sign") {
    auto s = AdamState::fresh(p.theta.size(), 1e-3);
    const auto before = p.theta;
    std::vector<double> g{0.3, -2.0, 5.0, -0.01, 1.0};
    adam_step(s, p, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(p.theta[i] - before[i] == doctest::Approx(-1e-3 * (g[i] > 0 ? 1.0 : -1.0)).epsilon(1e-4));
    }
  }
  SUBCASE("length mismatch") {
    auto s = AdamState::fresh(p.theta.size());
    CHECK_THROWS_AS(adam_step(s, p, std::vector<double>(3, 0.0)), std::invalid_argument);
  }
  SUBCASE("deterministic") {
    auto s1 = AdamState::fresh(p.theta.size());
    auto s2 = s1;
    auto p1 = p, p2 = p;
    std::vector<double> g{0.1, 0.2, 0.3, 0.4, 0.5};
    adam_step(s1, p1, g);
    adam_step(s2, p2, g);
    CHECK(p1.theta == p2.theta);
    CHECK(s1.m == s2.m);
    CHECK(s1.v == s2.v);
  }
}

TEST_CASE("adam minimises a quadratic bowl") {
  // f(theta) = |theta|^2 from (1, 1): theta lives in the first two slots.
  NetworkParams p{arch({1}, Activation::relu), {1.0, 1.0, 0.0, 0.0, 0.0}};
  auto s = AdamState::fresh(p.theta.size(), 0.01);
  std::size_t steps = 0;
  for (; steps < 5000; ++steps) {
    if (std::hypot(p.theta[0], p.theta[1]) < 1e-3) break;
    std::vector<double> g{2.0 * p.theta[0], 2.0 * p.theta[1], 0.0, 0.0, 0.0};
    adam_step(s, p, g);
  }
  CHECK(std::hypot(p.theta[0], p.theta[1]) < 1e-3);
  CHECK(steps <= 5000);
}
