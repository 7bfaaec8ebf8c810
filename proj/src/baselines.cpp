#include "dqr/baselines.hpp"

#include <stdexcept>

namespace dqr {

Vector AffineModel::predict(const Matrix& X) const {
  return (X * slope).array() + intercept;
}

AffineModel fit_linear_qr(const Dataset& data, double tau, const TrainConfig& cfg) {
  const Eigen::Index d = data.X.cols();
  if (data.size() <= d + 1)
    throw std::invalid_argument("fit_linear_qr: need n > d + 1 samples");
  // A single affine layer is exactly the (d+1)-parameter model.
  Rng rng(cfg.seed);
  Mlp mlp = init({static_cast<int>(d), 1}, rng);
  TrainResult fitted = train(std::move(mlp), data.X, data.y,
                             PinballObjective{tau}, cfg);
  AffineModel model;
  model.slope = fitted.mlp.layers[0].weights.row(0).transpose();
  model.intercept = fitted.mlp.layers[0].bias(0);
  return model;
}

TrainResult fit_dls(const Dataset& data, const std::vector<int>& net_shape,
                    const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  Mlp mlp = init(net_shape, rng);
  return train(std::move(mlp), data.X, data.y, SquaredObjective{}, cfg);
}

}  // namespace dqr
