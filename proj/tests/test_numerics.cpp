#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mapd/adam.hpp"
#include "mapd/distributions.hpp"
#include "mapd/mlp.hpp"
#include "oracles.hpp"

using namespace mapd;

TEST_CASE("forward: zero-weight net maps anything to zero") {
  Mlp net({3, 4, 2});
  std::vector<double> params(static_cast<std::size_t>(net.param_count()), 0.0);
  auto out = net.forward(params, std::vector<double>{1.0, -2.0, 0.5});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("forward: identity single linear layer") {
  Mlp net({3, 3});
  std::vector<double> params(static_cast<std::size_t>(net.param_count()), 0.0);
  for (int i = 0; i < 3; ++i) params[static_cast<std::size_t>(i * 3 + i)] = 1.0;
  const std::vector<double> x = {0.3, -1.7, 2.0};
  auto out = net.forward(params, x);
  for (int i = 0; i < 3; ++i) CHECK(out[static_cast<std::size_t>(i)] == doctest::Approx(x[static_cast<std::size_t>(i)]).epsilon(1e-15));
}

TEST_CASE("forward: two-layer net against a pencil-and-paper pass") {
  // sizes {2,2,1}; W1 = [[0.5,-0.25],[0.1,0.3]], b1 = [0.1,-0.2],
  // W2 = [[0.7,-0.4]], b2 = [0.05]; input [1,0]:
  //   h = tanh([0.6, -0.1]); out = 0.7 h0 - 0.4 h1 + 0.05 = 0.465801894748607...
  Mlp net({2, 2, 1});
  std::vector<double> params = {0.5, -0.25, 0.1, 0.3, 0.1, -0.2, 0.7, -0.4, 0.05};
  auto out = net.forward(params, std::vector<double>{1.0, 0.0});
  CHECK(out[0] == doctest::Approx(0.46580189474860703).epsilon(1e-12));
}

TEST_CASE("forward: dimension mismatch is fatal") {
  Mlp net({3, 2});
  std::vector<double> params(static_cast<std::size_t>(net.param_count()), 0.0);
  CHECK_THROWS_AS((void)net.forward(params, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("backward: zero output gradient gives zero parameter gradient") {
  Mlp net({3, 5, 2});
  std::vector<double> params(static_cast<std::size_t>(net.param_count()));
  Rng rng(7);
  net.init_params(params, rng);
  std::vector<double> grad(params.size(), 0.0);
  net.backward(params, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0.0, 0.0}, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward: single linear layer with loss = output^2") {
  Mlp net({3, 1});
  std::vector<double> params = {0.4, -0.2, 0.9, 0.3};
  const std::vector<double> x = {1.5, -0.5, 2.0};
  const double out = net.forward(params, x)[0];
  std::vector<double> grad(params.size(), 0.0);
  net.backward(params, x, std::vector<double>{2.0 * out}, grad);
  for (int i = 0; i < 3; ++i)
    CHECK(grad[static_cast<std::size_t>(i)] == doctest::Approx(2.0 * out * x[static_cast<std::size_t>(i)]).epsilon(1e-12));
  CHECK(grad[3] == doctest::Approx(2.0 * out).epsilon(1e-12));
}

TEST_CASE("backward: 2x8x2 net matches central finite differences") {
  Mlp net({2, 8, 2});
  std::vector<double> params(static_cast<std::size_t>(net.param_count()));
  Rng rng(123);
  net.init_params(params, rng);
  const std::vector<double> x = {0.7, -1.2};
  const std::vector<double> w = {0.6, -1.1};  // fixed loss = w . output
  auto loss = [&](const std::vector<double>& p) {
    auto out = net.forward(p, x);
    return w[0] * out[0] + w[1] * out[1];
  };
  std::vector<double> analytic(params.size(), 0.0);
  net.backward(params, x, w, analytic);
  auto fd = oracles::finite_diff_gradient(loss, params, 1e-5);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
    worst = std::max(worst, oracles::rel_err(analytic[i], fd[i]));
  CHECK(worst < 1e-4);
}

TEST_CASE("backward: input gradient matches finite differences") {
  Mlp net({4, 6, 3});
  std::vector<double> params(static_cast<std::size_t>(net.param_count()));
  Rng rng(5);
  net.init_params(params, rng);
  std::vector<double> x = {0.2, -0.4, 1.1, 0.9};
  const std::vector<double> w = {1.0, -0.5, 0.25};
  auto loss = [&](const std::vector<double>& input) {
    auto out = net.forward(params, input);
    return w[0] * out[0] + w[1] * out[1] + w[2] * out[2];
  };
  std::vector<double> pg(params.size(), 0.0), ig(x.size(), 0.0);
  net.backward(params, x, w, pg, ig);
  auto fd = oracles::finite_diff_gradient(loss, x, 1e-5);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(oracles::rel_err(ig[i], fd[i]) < 1e-4);
}

TEST_CASE("gradient check property: random small nets, random linear losses") {
  Rng rng(20240);
  int total = 0, ok = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n_hidden = rng.uniform_int(0, 2);
    std::vector<int> sizes = {rng.uniform_int(1, 16)};
    for (int h = 0; h < n_hidden; ++h) sizes.push_back(rng.uniform_int(1, 16));
    sizes.push_back(rng.uniform_int(1, 16));
    Mlp net(sizes);
    std::vector<double> params(static_cast<std::size_t>(net.param_count()));
    net.init_params(params, rng);
    std::vector<double> x(static_cast<std::size_t>(net.input_size()));
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    std::vector<double> w(static_cast<std::size_t>(net.output_size()));
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    auto loss = [&](const std::vector<double>& p) {
      auto out = net.forward(p, x);
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * out[i];
      return acc;
    };
    std::vector<double> analytic(params.size(), 0.0);
    net.backward(params, x, w, analytic);
    auto fd = oracles::finite_diff_gradient(loss, params, 1e-5);
    for (std::size_t i = 0; i < params.size(); ++i) {
      ++total;
      if (oracles::rel_err(analytic[i], fd[i]) < 1e-4) ++ok;
    }
  }
  CHECK(static_cast<double>(ok) >= 0.99 * static_cast<double>(total));
}

TEST_CASE("adam: zero gradient is a fixed point") {
  std::vector<double> params = {1.0, -2.0, 3.0};
  const auto before = params;
  AdamState st(params.size());
  for (int i = 0; i < 10; ++i)
    CHECK(adam_step(params, std::vector<double>{0.0, 0.0, 0.0}, st, 0.1));
  CHECK(params == before);
}

TEST_CASE("adam: constant gradient moves params against its sign") {
  std::vector<double> params = {0.0, 0.0};
  AdamState st(2);
  for (int i = 0; i < 50; ++i) CHECK(adam_step(params, std::vector<double>{1.0, -2.5}, st, 0.01));
  CHECK(params[0] < 0.0);
  CHECK(params[1] > 0.0);
}

TEST_CASE("adam: first bias-corrected step equals -lr") {
  // m_hat = g, v_hat = g^2 => step = lr * g / (|g| + eps) ~ lr for g = 1.
  std::vector<double> params = {0.0};
  AdamState st(1);
  CHECK(adam_step(params, std::vector<double>{1.0}, st, 0.1));
  CHECK(params[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam: non-finite gradient skips the step") {
  std::vector<double> params = {1.0};
  AdamState st(1);
  CHECK_FALSE(adam_step(params, std::vector<double>{std::nan("")}, st, 0.1));
  CHECK(params[0] == 1.0);
  CHECK(st.step == 0);
}

TEST_CASE("softmax: paper-anchored and closed-form values") {
  auto half = softmax(std::vector<double>{0.0, 0.0});
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-12));

  for (double c : {-3.0, 0.0, 17.5}) {
    auto u = softmax(std::vector<double>{c, c, c, c, c});
    for (double v : u) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
  }

  auto probs = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK(probs[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
  CHECK(probs[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("softmax: probability vector, shift invariance, argmax preserved") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(static_cast<std::size_t>(rng.uniform_int(2, 9)));
    for (auto& v : logits) v = rng.uniform(-30.0, 30.0);
    auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(argmax(p) == argmax(logits));

    auto shifted = logits;
    for (auto& v : shifted) v += 123.456;
    auto p2 = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p2[i] == doctest::Approx(p[i]).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)softmax(std::vector<double>{1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST_CASE("reparam_sample: definition cases") {
  LatentGaussian g{{1.0, -2.0}, {0.3, 1.2}};
  auto z0 = reparam_sample(g, std::vector<double>{0.0, 0.0});
  CHECK(z0[0] == 1.0);
  CHECK(z0[1] == -2.0);

  // log-std low enough that exp underflows to exactly zero
  LatentGaussian tight{{0.5, 0.25}, {-800.0, -800.0}};
  auto z1 = reparam_sample(tight, std::vector<double>{3.0, -4.0});
  CHECK(z1[0] == 0.5);
  CHECK(z1[1] == 0.25);

  LatentGaussian one{{1.0}, {std::log(2.0)}};
  auto z2 = reparam_sample(one, std::vector<double>{0.5});
  CHECK(z2[0] == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)reparam_sample(one, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}
