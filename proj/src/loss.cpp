#include "dqr/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dqr {

double pinball(const Vector& residuals, double tau) {
  if (residuals.size() == 0) throw std::invalid_argument("pinball: empty residuals");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("pinball: tau must be in (0,1)");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double r = residuals(i);
    sum += r * (tau - (r <= 0.0 ? 1.0 : 0.0));
  }
  return sum / static_cast<double>(residuals.size());
}

double pinball_subgrad(double residual, double tau) {
  return tau - (residual <= 0.0 ? 1.0 : 0.0);
}

double squared_loss(const Vector& residuals) {
  if (residuals.size() == 0) throw std::invalid_argument("squared_loss: empty residuals");
  return residuals.squaredNorm() / static_cast<double>(residuals.size());
}

Vector squared_loss_grad(const Vector& residuals) {
  if (residuals.size() == 0) throw std::invalid_argument("squared_loss_grad: empty residuals");
  return (2.0 / static_cast<double>(residuals.size())) * residuals;
}

AdamState AdamState::zeros_like(const Mlp& mlp) {
  AdamState s;
  for (const auto& layer : mlp.layers) {
    s.m_weights.push_back(Matrix::Zero(layer.fan_out(), layer.fan_in()));
    s.v_weights.push_back(Matrix::Zero(layer.fan_out(), layer.fan_in()));
    s.m_bias.push_back(Vector::Zero(layer.fan_out()));
    s.v_bias.push_back(Vector::Zero(layer.fan_out()));
  }
  return s;
}

void adam_step(Mlp& mlp, const GradientSet& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.weight_grads.size() != mlp.layers.size())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  if (!grads.all_finite())
    throw std::runtime_error("adam_step: non-finite gradient");
  state.t += 1;
  const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      const auto m_hat = m / corr1;
      const auto v_hat = v / corr2;
      param -= cfg.lr *
               (m_hat.array() / (v_hat.array().sqrt() + cfg.eps)).matrix();
    };
    update(mlp.layers[k].weights, state.m_weights[k], state.v_weights[k],
           grads.weight_grads[k]);
    update(mlp.layers[k].bias, state.m_bias[k], state.v_bias[k],
           grads.bias_grads[k]);
  }
}

namespace {

double objective_loss(const Objective& obj, const Vector& residuals) {
  if (const auto* pin = std::get_if<PinballObjective>(&obj))
    return pinball(residuals, pin->tau);
  return squared_loss(residuals);
}

// dLoss/dPrediction for the mean loss over `residuals`.
Vector objective_grad_wrt_pred(const Objective& obj, const Vector& residuals) {
  const double n = static_cast<double>(residuals.size());
  Vector g(residuals.size());
  if (const auto* pin = std::get_if<PinballObjective>(&obj)) {
    for (Eigen::Index i = 0; i < residuals.size(); ++i)
      g(i) = -pinball_subgrad(residuals(i), pin->tau) / n;
  } else {
    g = -squared_loss_grad(residuals);
  }
  return g;
}

}  // namespace

TrainResult train(Mlp mlp, const Matrix& X, const Vector& y,
                  const Objective& objective, const TrainConfig& cfg) {
  const Eigen::Index n = X.rows();
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (y.size() != n) throw std::invalid_argument("train: X/y row mismatch");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

  int batch = cfg.batch_size > 0 ? cfg.batch_size
                                 : std::max<int>(1, static_cast<int>(n) / 2);
  batch = std::min<int>(batch, static_cast<int>(n));

  AdamState state = AdamState::zeros_like(mlp);
  Rng rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));

  Matrix bx(batch, X.cols());
  Vector by(batch);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the replication stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index count = std::min<Eigen::Index>(batch, n - start);
      bx.conservativeResize(count, Eigen::NoChange);
      by.conservativeResize(count);
      for (Eigen::Index i = 0; i < count; ++i) {
        bx.row(i) = X.row(order[static_cast<std::size_t>(start + i)]);
        by(i) = y(order[static_cast<std::size_t>(start + i)]);
      }
      const Vector pred = predict(mlp, bx);
      const Vector residuals = by - pred;
      const GradientSet grads =
          backward(mlp, bx, objective_grad_wrt_pred(objective, residuals));
      adam_step(mlp, grads, state, cfg.adam);
    }
    const double epoch_loss = objective_loss(objective, y - predict(mlp, X));
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("train: loss diverged at epoch " +
                               std::to_string(epoch));
    }
    result.loss_trace.push_back(epoch_loss);
  }
  result.mlp = std::move(mlp);
  return result;
}

}  // namespace dqr
