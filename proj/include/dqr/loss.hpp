#ifndef DQR_LOSS_HPP
#define DQR_LOSS_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "dqr/net.hpp"

namespace dqr {

/// Mean check loss (1/n) sum rho_tau(r_i) with rho_tau(x) = x(tau - I(x<=0)).
double pinball(const Vector& residuals, double tau);

/// d rho_tau / dr. Value is tau for r > 0 and tau - 1 for r <= 0.
double pinball_subgrad(double residual, double tau);

/// Mean of r^2.
double squared_loss(const Vector& residuals);

/// d mean(r^2) / dr_i = 2 r_i / n.
Vector squared_loss_grad(const Vector& residuals);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m_weights;
  std::vector<Vector> m_bias;
  std::vector<Matrix> v_weights;
  std::vector<Vector> v_bias;
  std::int64_t t = 0;

  static AdamState zeros_like(const Mlp& mlp);
};

/// One Adam update in place. Throws on non-finite gradients.
void adam_step(Mlp& mlp, const GradientSet& grads, AdamState& state,
               const AdamConfig& cfg);

struct PinballObjective {
  double tau;
};
struct SquaredObjective {};
using Objective = std::variant<PinballObjective, SquaredObjective>;

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 0;  // 0 means n/2
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Mlp mlp;
  std::vector<double> loss_trace;  // full-data training loss per epoch
};

/// Minibatch Adam training over a fixed epoch budget. Batches are
/// reshuffled each epoch from the config seed. Throws if the training loss
/// turns non-finite, carrying the epoch index in the message.
TrainResult train(Mlp mlp, const Matrix& X, const Vector& y,
                  const Objective& objective, const TrainConfig& cfg);

}  // namespace dqr

#endif  // DQR_LOSS_HPP
