#ifndef DQR_NET_HPP
#define DQR_NET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dqr/rng.hpp"

namespace dqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One affine layer y = W x + b. `weights` is fan_out x fan_in.
struct DenseLayer {
  Matrix weights;
  Vector bias;

  int fan_in() const { return static_cast<int>(weights.cols()); }
  int fan_out() const { return static_cast<int>(weights.rows()); }
};

/// Dense feedforward network. ReLU on hidden layers, identity at the
/// output, optionally hard-clamped to [-output_bound, output_bound].
struct Mlp {
  std::vector<DenseLayer> layers;
  std::optional<double> output_bound;

  int input_dim() const { return layers.front().fan_in(); }
  int output_dim() const { return layers.back().fan_out(); }
  /// Number of hidden layers.
  int depth() const { return static_cast<int>(layers.size()) - 1; }
  /// Maximum hidden-layer width; 0 for a single affine layer.
  int width() const;
  /// Full per-layer width list (input, hidden..., output).
  std::vector<int> shape() const;
};

/// Per-layer gradients, shapes mirroring the owning Mlp.
struct GradientSet {
  std::vector<Matrix> weight_grads;
  std::vector<Vector> bias_grads;

  void set_zero();
  bool all_finite() const;
};

/// Exact parameter count S = sum_k fan_out_k * (fan_in_k + 1).
std::int64_t param_count(const Mlp& mlp);

/// Upper bound W(D+1) + (W^2+W)(D-1) + W + 1 for D >= 1 networks.
std::int64_t param_count_bound(int width, int depth);

enum class InitScheme { UniformFanIn };

/// Fresh network for the given width list. UniformFanIn draws every entry
/// from uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Mlp init(const std::vector<int>& shape, Rng& rng,
         InitScheme scheme = InitScheme::UniformFanIn);

/// Batch forward pass. X is n x input_dim, result n x output_dim.
Matrix forward(const Mlp& mlp, const Matrix& X);

/// Scalar-output convenience; requires output_dim == 1.
Vector predict(const Mlp& mlp, const Matrix& X);

/// Reverse-mode gradient of sum_i dot(dLoss_dOut.row(i), f(x_i)) w.r.t.
/// every parameter. ReLU subgradient at 0 is 0; clamped outputs get zero
/// gradient outside the bound.
GradientSet backward(const Mlp& mlp, const Matrix& X, const Matrix& dLoss_dOut);

/// Scalar-output overload.
GradientSet backward(const Mlp& mlp, const Matrix& X, const Vector& dLoss_dOut);

/// Checkpoint I/O. The JSON variant stores parameters as shortest
/// round-trip decimal strings and is bit-exact; the binary variant stores
/// raw little-endian doubles.
std::string to_json_checkpoint(const Mlp& mlp);
Mlp from_json_checkpoint(const std::string& text);
void save_binary_checkpoint(const Mlp& mlp, const std::string& path);
Mlp load_binary_checkpoint(const std::string& path);

}  // namespace dqr

#endif  // DQR_NET_HPP
