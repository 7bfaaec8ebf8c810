#ifndef DQR_BASELINES_HPP
#define DQR_BASELINES_HPP

#include "dqr/datagen.hpp"
#include "dqr/loss.hpp"

namespace dqr {

struct AffineModel {
  Vector slope;
  double intercept = 0.0;

  Vector predict(const Matrix& X) const;
};

/// Linear quantile regression: affine model, pinball loss, fitted with the
/// same Adam loop as the networks.
AffineModel fit_linear_qr(const Dataset& data, double tau, const TrainConfig& cfg);

/// Deep least squares: MLP of the given shape trained under squared loss.
TrainResult fit_dls(const Dataset& data, const std::vector<int>& net_shape,
                    const TrainConfig& cfg);

}  // namespace dqr

#endif  // DQR_BASELINES_HPP
