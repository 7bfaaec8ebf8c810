#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dqr/loss.hpp"

using namespace dqr;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double rho(double r, double tau) { return r * (tau - (r <= 0.0 ? 1.0 : 0.0)); }

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("pinball hand values") {
  CHECK(pinball(vec({1.0}), 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pinball(vec({-2.0}), 0.25) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(pinball(vec({1.0, -1.0}), 0.9) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pinball(vec({0.0, 0.0}), 0.3) == 0.0);
  CHECK_THROWS_AS(pinball(vec({1.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pinball(vec({1.0}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pinball(Vector(), 0.5), std::invalid_argument);
}

TEST_CASE("pinball subgradient follows the I(x<=0) convention") {
  CHECK(pinball_subgrad(3.0, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pinball_subgrad(0.0, 0.25) == doctest::Approx(-0.75).epsilon(1e-15));
  const double h = 1e-6;
  const double fd = (rho(2.0 + h, 0.7) - rho(2.0 - h, 0.7)) / (2.0 * h);
  CHECK(pinball_subgrad(2.0, 0.7) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("reflection identity rho_tau(r) + rho_(1-tau)(r) = |r|") {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const double r = rng.uniform(-10.0, 10.0);
    const double tau = rng.uniform(0.01, 0.99);
    Vector v = vec({r});
    CHECK(pinball(v, tau) + pinball(v, 1.0 - tau) ==
          doctest::Approx(std::abs(r)).epsilon(1e-12));
  }
}

TEST_CASE("squared loss and gradient") {
  CHECK(squared_loss(vec({2.0})) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(squared_loss(vec({1.0, -1.0})) == doctest::Approx(1.0).epsilon(1e-15));
  Vector r = vec({0.4, -1.7, 2.2});
  Vector g = squared_loss_grad(r);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    Vector up = r, down = r;
    up(i) += h;
    down(i) -= h;
    const double fd = (squared_loss(up) - squared_loss(down)) / (2.0 * h);
    CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("one Adam step moves a fresh parameter by about lr") {
  Mlp net;
  net.layers.push_back({(Matrix(1, 1) << 0.5).finished(),
                        (Vector(1) << 0.0).finished()});
  AdamState state = AdamState::zeros_like(net);
  GradientSet g;
  g.weight_grads.push_back((Matrix(1, 1) << 2.0).finished());
  g.bias_grads.push_back(Vector::Zero(1));
  adam_step(net, g, state, AdamConfig{});
  // Bias-corrected first step: lr * g / (|g| + eps * sqrt-correction).
  CHECK(net.layers[0].weights(0, 0) == doctest::Approx(0.5 - 0.01).epsilon(1e-5));
  CHECK(state.t == 1);
}

TEST_CASE("zero gradient leaves parameters unchanged but advances t") {
  Mlp net;
  net.layers.push_back({(Matrix(1, 2) << 0.3, -0.8).finished(),
                        (Vector(1) << 0.1).finished()});
  AdamState state = AdamState::zeros_like(net);
  GradientSet g;
  g.weight_grads.push_back(Matrix::Zero(1, 2));
  g.bias_grads.push_back(Vector::Zero(1));
  adam_step(net, g, state, AdamConfig{});
  CHECK(net.layers[0].weights(0, 0) == 0.3);
  CHECK(net.layers[0].weights(0, 1) == -0.8);
  CHECK(net.layers[0].bias(0) == 0.1);
  CHECK(state.t == 1);
}

TEST_CASE("Adam first step is nearly invariant to gradient scaling") {
  auto first_step = [](double scale) {
    Mlp net;
    net.layers.push_back({(Matrix(1, 1) << 1.0).finished(), Vector::Zero(1)});
    AdamState state = AdamState::zeros_like(net);
    GradientSet g;
    g.weight_grads.push_back((Matrix(1, 1) << scale * 0.37).finished());
    g.bias_grads.push_back((Vector(1) << scale * -0.21).finished());
    adam_step(net, g, state, AdamConfig{});
    return 1.0 - net.layers[0].weights(0, 0);
  };
  const double base = first_step(1.0);
  const double doubled = first_step(2.0);
  CHECK(std::abs(doubled - base) / std::abs(base) < 1e-6);
}

TEST_CASE("adam_step fails fast on non-finite gradients") {
  Mlp net;
  net.layers.push_back({(Matrix(1, 1) << 1.0).finished(), Vector::Zero(1)});
  AdamState state = AdamState::zeros_like(net);
  GradientSet g;
  g.weight_grads.push_back(
      (Matrix(1, 1) << std::numeric_limits<double>::quiet_NaN()).finished());
  g.bias_grads.push_back(Vector::Zero(1));
  CHECK_THROWS_AS(adam_step(net, g, state, AdamConfig{}), std::runtime_error);
}

TEST_CASE("per-batch gradient sums over one epoch match the full batch") {
  Rng rng(55);
  Mlp net = init({2, 6, 1}, rng);
  const Eigen::Index n = 24;
  Matrix X(n, 2);
  Vector dLoss(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform(-1.0, 1.0);
    X(i, 1) = rng.uniform(-1.0, 1.0);
    dLoss(i) = rng.uniform(-1.0, 1.0);
  }
  GradientSet full = backward(net, X, dLoss);
  GradientSet summed = backward(net, X.topRows(8), Vector(dLoss.head(8)));
  for (int b = 1; b < 3; ++b) {
    GradientSet part =
        backward(net, X.middleRows(8 * b, 8), Vector(dLoss.segment(8 * b, 8)));
    for (std::size_t k = 0; k < part.weight_grads.size(); ++k) {
      summed.weight_grads[k] += part.weight_grads[k];
      summed.bias_grads[k] += part.bias_grads[k];
    }
  }
  for (std::size_t k = 0; k < full.weight_grads.size(); ++k) {
    CHECK((summed.weight_grads[k] - full.weight_grads[k]).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK((summed.bias_grads[k] - full.bias_grads[k]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("median training on constant data recovers the constant") {
  const double c = 1.7;
  const Eigen::Index n = 32;
  Matrix X = Matrix::Zero(n, 1);
  Vector y = Vector::Constant(n, c);
  Mlp model;
  // Bias-only model: zero frozen-by-gradient weight, trainable bias.
  model.layers.push_back({Matrix::Zero(1, 1), Vector::Zero(1)});
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.seed = 4;
  TrainResult fit = train(std::move(model), X, y, PinballObjective{0.5}, cfg);
  CHECK(std::abs(fit.mlp.layers[0].bias(0) - c) < 0.05);
  CHECK(fit.loss_trace.size() == 500);
  CHECK(fit.loss_trace.back() <= fit.loss_trace.front());
}

TEST_CASE("squared-loss training recovers a noiseless line") {
  Rng rng(8);
  const Eigen::Index n = 64;
  Matrix X(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform01();
    y(i) = 2.0 * X(i, 0);
  }
  Mlp model = init({1, 1}, rng);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.seed = 9;
  TrainResult fit = train(std::move(model), X, y, SquaredObjective{}, cfg);
  CHECK(std::abs(fit.mlp.layers[0].weights(0, 0) - 2.0) < 0.1);
}

TEST_CASE("intercept-only pinball fit lands on the sample quantile") {
  Rng rng(123);
  const Eigen::Index n = 200;
  Matrix X = Matrix::Zero(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal();
  Mlp model;
  model.layers.push_back({Matrix::Zero(1, 1), Vector::Zero(1)});
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.seed = 12;
  const double tau = 0.25;
  TrainResult fit = train(std::move(model), X, y, PinballObjective{tau}, cfg);
  const double est = fit.mlp.layers[0].bias(0);

  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const auto lo_idx = static_cast<std::size_t>(std::floor(n * tau)) - 1;
  const auto hi_idx = static_cast<std::size_t>(std::ceil(n * tau)) + 1;
  CHECK(est >= sorted[lo_idx] - 1e-9);
  CHECK(est <= sorted[hi_idx] + 1e-9);
}

TEST_CASE("training divergence raises an error naming the epoch") {
  Rng rng(3);
  const Eigen::Index n = 16;
  Matrix X(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform01();
    y(i) = 1e150;
  }
  Mlp model = init({1, 4, 1}, rng);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = static_cast<int>(n);  // one step per epoch
  cfg.adam.lr = 1e160;
  CHECK_THROWS_WITH_AS(train(std::move(model), X, y, SquaredObjective{}, cfg),
                       doctest::Contains("epoch"), std::runtime_error);
}

}  // TEST_SUITE
