#include "dqr/net.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace dqr {

namespace {

void check_input(const Mlp& mlp, const Matrix& X) {
  if (mlp.layers.empty()) throw std::invalid_argument("net: empty network");
  if (X.cols() != mlp.layers.front().fan_in()) {
    throw std::invalid_argument(
        "net: input has " + std::to_string(X.cols()) +
        " columns but layer 0 expects fan_in " +
        std::to_string(mlp.layers.front().fan_in()));
  }
  for (std::size_t k = 1; k < mlp.layers.size(); ++k) {
    if (mlp.layers[k].fan_in() != mlp.layers[k - 1].fan_out()) {
      throw std::invalid_argument("net: layer " + std::to_string(k) +
                                  " fan_in does not chain with layer " +
                                  std::to_string(k - 1));
    }
  }
}

// Activations after each layer (post-ReLU for hidden, raw affine for the
// last). acts[0] is the input.
std::vector<Matrix> run_forward(const Mlp& mlp, const Matrix& X) {
  std::vector<Matrix> acts;
  acts.reserve(mlp.layers.size() + 1);
  acts.push_back(X);
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    const DenseLayer& layer = mlp.layers[k];
    Matrix z = acts.back() * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    if (k + 1 < mlp.layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

std::string double_to_string(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double string_to_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw std::invalid_argument("net: bad number '" + s + "'");
  return v;
}

}  // namespace

int Mlp::width() const {
  int w = 0;
  for (int k = 0; k + 1 < static_cast<int>(layers.size()); ++k)
    w = std::max(w, layers[k].fan_out());
  return w;
}

std::vector<int> Mlp::shape() const {
  std::vector<int> s;
  s.push_back(layers.front().fan_in());
  for (const auto& layer : layers) s.push_back(layer.fan_out());
  return s;
}

void GradientSet::set_zero() {
  for (auto& g : weight_grads) g.setZero();
  for (auto& g : bias_grads) g.setZero();
}

bool GradientSet::all_finite() const {
  for (const auto& g : weight_grads)
    if (!g.allFinite()) return false;
  for (const auto& g : bias_grads)
    if (!g.allFinite()) return false;
  return true;
}

std::int64_t param_count(const Mlp& mlp) {
  std::int64_t s = 0;
  for (const auto& layer : mlp.layers)
    s += static_cast<std::int64_t>(layer.fan_out()) * (layer.fan_in() + 1);
  return s;
}

std::int64_t param_count_bound(int width, int depth) {
  const std::int64_t w = width;
  const std::int64_t d = depth;
  return w * (d + 1) + (w * w + w) * (d - 1) + w + 1;
}

Mlp init(const std::vector<int>& shape, Rng& rng, InitScheme scheme) {
  if (shape.size() < 2) throw std::invalid_argument("init: shape needs >= 2 entries");
  for (int w : shape)
    if (w < 1) throw std::invalid_argument("init: widths must be >= 1");
  (void)scheme;
  Mlp mlp;
  for (std::size_t k = 0; k + 1 < shape.size(); ++k) {
    const int fan_in = shape[k];
    const int fan_out = shape[k + 1];
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) layer.weights(i, j) = rng.uniform(-a, a);
    for (int i = 0; i < fan_out; ++i) layer.bias(i) = rng.uniform(-a, a);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Matrix forward(const Mlp& mlp, const Matrix& X) {
  check_input(mlp, X);
  Matrix out = run_forward(mlp, X).back();
  if (mlp.output_bound) {
    const double b = *mlp.output_bound;
    out = out.cwiseMax(-b).cwiseMin(b);
  }
  return out;
}

Vector predict(const Mlp& mlp, const Matrix& X) {
  if (mlp.layers.back().fan_out() != 1)
    throw std::invalid_argument("predict: network output is not scalar");
  return forward(mlp, X).col(0);
}

GradientSet backward(const Mlp& mlp, const Matrix& X, const Matrix& dLoss_dOut) {
  check_input(mlp, X);
  if (dLoss_dOut.rows() != X.rows() ||
      dLoss_dOut.cols() != mlp.layers.back().fan_out()) {
    throw std::invalid_argument("backward: dLoss_dOut shape mismatch");
  }
  const std::vector<Matrix> acts = run_forward(mlp, X);

  GradientSet grads;
  grads.weight_grads.resize(mlp.layers.size());
  grads.bias_grads.resize(mlp.layers.size());

  Matrix delta = dLoss_dOut;
  if (mlp.output_bound) {
    const double b = *mlp.output_bound;
    const Matrix& raw = acts.back();
    delta = delta.cwiseProduct(
        (raw.array().abs() <= b).cast<double>().matrix());
  }
  for (int k = static_cast<int>(mlp.layers.size()) - 1; k >= 0; --k) {
    grads.weight_grads[k] = delta.transpose() * acts[k];
    grads.bias_grads[k] = delta.colwise().sum().transpose();
    if (k > 0) {
      Matrix upstream = delta * mlp.layers[k].weights;
      // acts[k] is post-ReLU; subgradient at 0 is 0.
      delta = upstream.cwiseProduct(
          (acts[k].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

GradientSet backward(const Mlp& mlp, const Matrix& X, const Vector& dLoss_dOut) {
  return backward(mlp, X, Matrix(dLoss_dOut));
}

std::string to_json_checkpoint(const Mlp& mlp) {
  nlohmann::json doc;
  doc["shape"] = mlp.shape();
  if (mlp.output_bound) doc["output_bound"] = double_to_string(*mlp.output_bound);
  nlohmann::json params = nlohmann::json::array();
  for (const auto& layer : mlp.layers) {
    for (int i = 0; i < layer.fan_out(); ++i)
      for (int j = 0; j < layer.fan_in(); ++j)
        params.push_back(double_to_string(layer.weights(i, j)));
    for (int i = 0; i < layer.fan_out(); ++i)
      params.push_back(double_to_string(layer.bias(i)));
  }
  doc["params"] = std::move(params);
  return doc.dump();
}

Mlp from_json_checkpoint(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  const std::vector<int> shape = doc.at("shape").get<std::vector<int>>();
  if (shape.size() < 2) throw std::invalid_argument("checkpoint: bad shape");
  Mlp mlp;
  const auto& params = doc.at("params");
  std::size_t pos = 0;
  auto next = [&]() -> double {
    if (pos >= params.size()) throw std::invalid_argument("checkpoint: truncated params");
    return string_to_double(params[pos++].get<std::string>());
  };
  for (std::size_t k = 0; k + 1 < shape.size(); ++k) {
    DenseLayer layer;
    layer.weights.resize(shape[k + 1], shape[k]);
    layer.bias.resize(shape[k + 1]);
    for (int i = 0; i < layer.fan_out(); ++i)
      for (int j = 0; j < layer.fan_in(); ++j) layer.weights(i, j) = next();
    for (int i = 0; i < layer.fan_out(); ++i) layer.bias(i) = next();
    mlp.layers.push_back(std::move(layer));
  }
  if (pos != params.size()) throw std::invalid_argument("checkpoint: trailing params");
  if (doc.contains("output_bound"))
    mlp.output_bound = string_to_double(doc["output_bound"].get<std::string>());
  return mlp;
}

void save_binary_checkpoint(const Mlp& mlp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  const std::vector<int> shape = mlp.shape();
  const std::int64_t n = static_cast<std::int64_t>(shape.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (int w : shape) {
    const std::int64_t v = w;
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  const double bound = mlp.output_bound ? *mlp.output_bound : std::nan("");
  out.write(reinterpret_cast<const char*>(&bound), sizeof(bound));
  for (const auto& layer : mlp.layers) {
    for (int i = 0; i < layer.fan_out(); ++i)
      for (int j = 0; j < layer.fan_in(); ++j) {
        const double v = layer.weights(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    for (int i = 0; i < layer.fan_out(); ++i) {
      const double v = layer.bias(i);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Mlp load_binary_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::int64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n < 2) throw std::runtime_error("checkpoint: bad header in " + path);
  std::vector<int> shape(static_cast<std::size_t>(n));
  for (auto& w : shape) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    w = static_cast<int>(v);
  }
  double bound = 0.0;
  in.read(reinterpret_cast<char*>(&bound), sizeof(bound));
  Mlp mlp;
  auto next = [&]() {
    double v = 0.0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
    return v;
  };
  for (std::size_t k = 0; k + 1 < shape.size(); ++k) {
    DenseLayer layer;
    layer.weights.resize(shape[k + 1], shape[k]);
    layer.bias.resize(shape[k + 1]);
    for (int i = 0; i < layer.fan_out(); ++i)
      for (int j = 0; j < layer.fan_in(); ++j) layer.weights(i, j) = next();
    for (int i = 0; i < layer.fan_out(); ++i) layer.bias(i) = next();
    mlp.layers.push_back(std::move(layer));
  }
  if (!std::isnan(bound)) mlp.output_bound = bound;
  return mlp;
}

}  // namespace dqr
