#include "dqr/planner.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace dqr {

namespace {

double layer_alpha(const LayerSpec& l) { return l.is_linear ? 1.0 : l.holder_order; }
double layer_lambda(const LayerSpec& l) { return l.is_linear ? 1.0 : l.holder_const; }

// Largest k >= 0 with k^t <= n.
int floor_root(int n, int t) {
  if (t <= 1) return n;
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / t) + 1e-9));
  while (std::pow(static_cast<double>(k + 1), t) <= static_cast<double>(n)) ++k;
  while (k > 0 && std::pow(static_cast<double>(k), t) > static_cast<double>(n)) --k;
  return k;
}

// d_i * max{4 t floor(N^(1/t)) + 3 t, 12 N + 8}.
int nonlinear_block_width(const LayerSpec& layer, int N) {
  const int t = layer.arity;
  const int inner = std::max(4 * t * floor_root(N, t) + 3 * t, 12 * N + 8);
  return layer.d_in * inner;
}

std::int64_t floor_power(std::int64_t n, double exponent) {
  const double x = std::pow(static_cast<double>(n), exponent);
  return static_cast<std::int64_t>(std::floor(x + 1e-9));
}

}  // namespace

void CompositeSpec::validate() const {
  if (layers.empty()) throw std::invalid_argument("composite spec: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.d_in < 1 || l.d_out < 1)
      throw std::invalid_argument("composite spec: nonpositive dimension at layer " + std::to_string(i));
    if (l.arity < 1 || l.arity > l.d_in)
      throw std::invalid_argument("composite spec: arity out of [1, d_in] at layer " + std::to_string(i));
    if (!l.is_linear && !(l.holder_order > 0.0 && l.holder_order <= 1.0))
      throw std::invalid_argument("composite spec: holder order outside (0,1] at layer " + std::to_string(i));
    if (!l.is_linear && l.holder_const < 0.0)
      throw std::invalid_argument("composite spec: negative holder constant at layer " + std::to_string(i));
    if (i + 1 < layers.size() && l.d_out != layers[i + 1].d_in)
      throw std::invalid_argument("composite spec: broken chain between layers " +
                                  std::to_string(i) + " and " + std::to_string(i + 1));
  }
  if (layers.back().d_out != 1)
    throw std::invalid_argument("composite spec: final output dimension must be 1");
}

CompositeStats composite_stats(const CompositeSpec& spec) {
  spec.validate();
  const std::size_t q1 = spec.layers.size();
  CompositeStats stats;
  stats.c_star.resize(q1);
  stats.lambda_star.resize(q1);
  stats.alpha_star.resize(q1);
  stats.t_star.resize(q1);

  // suffix_alpha[j] = prod_{k=j..q} alpha_k; suffix_alpha[q+1] = 1.
  std::vector<double> suffix_alpha(q1 + 1, 1.0);
  for (std::size_t j = q1; j-- > 0;)
    suffix_alpha[j] = layer_alpha(spec.layers[j]) * suffix_alpha[j + 1];

  for (std::size_t i = 0; i < q1; ++i) {
    stats.c_star[i] = std::pow(18.0, suffix_alpha[i + 1]);
    stats.alpha_star[i] = suffix_alpha[i];
    double lam = 1.0;
    double tprod = 1.0;
    for (std::size_t j = i; j < q1; ++j) {
      lam *= std::pow(layer_lambda(spec.layers[j]), suffix_alpha[j + 1]);
      tprod *= std::pow(std::sqrt(static_cast<double>(spec.layers[j].arity)),
                        suffix_alpha[j]);
    }
    stats.lambda_star[i] = lam;
    stats.t_star[i] =
        tprod / std::pow(std::sqrt(static_cast<double>(spec.layers[i].arity)),
                         layer_alpha(spec.layers[i]));
  }

  bool found = false;
  double best = 0.0;
  for (std::size_t i = 0; i < q1; ++i) {
    if (spec.layers[i].is_linear) continue;
    const double ratio = stats.alpha_star[i] / spec.layers[i].arity;
    if (!found || ratio < best) {
      found = true;
      best = ratio;
      stats.aggregate_alpha = stats.alpha_star[i];
      stats.aggregate_t = static_cast<double>(spec.layers[i].arity);
    }
  }
  if (!found)
    throw std::invalid_argument("composite_stats: spec has no nonlinear layer");
  stats.aggregate_lambda = *std::max_element(stats.lambda_star.begin(), stats.lambda_star.end());
  stats.aggregate_d = *std::max_element(stats.t_star.begin(), stats.t_star.end());
  return stats;
}

int NetworkPlan::max_width() const {
  int w = 0;
  for (std::size_t k = 1; k + 1 < width_vector.size(); ++k)
    w = std::max(w, width_vector[k]);
  return w;
}

NetworkPlan plan(const CompositeSpec& spec, const std::vector<int>& N,
                 const std::vector<int>& L) {
  spec.validate();
  std::size_t nonlinear_count = 0;
  for (const auto& l : spec.layers)
    if (!l.is_linear) ++nonlinear_count;
  if (N.size() != nonlinear_count || L.size() != nonlinear_count)
    throw std::invalid_argument("plan: N/L length must equal the number of nonlinear layers");
  for (std::size_t i = 0; i < N.size(); ++i)
    if (N[i] < 1 || L[i] < 1)
      throw std::invalid_argument("plan: N_i and L_i must be >= 1");

  NetworkPlan out;
  out.width_vector.push_back(spec.ambient_dim());
  std::size_t next = 0;
  for (const auto& layer : spec.layers) {
    if (layer.is_linear) {
      out.width_vector.push_back(2 * layer.d_in);
      out.width_vector.push_back(layer.d_out);
    } else {
      const int w = nonlinear_block_width(layer, N[next]);
      const int block_depth = 12 * L[next] + 15;
      out.width_vector.insert(out.width_vector.end(),
                              static_cast<std::size_t>(block_depth), w);
      ++next;
    }
  }
  out.width_vector.push_back(1);
  out.depth = static_cast<int>(out.width_vector.size()) - 2;

  std::int64_t s = 0;
  for (std::size_t k = 0; k + 1 < out.width_vector.size(); ++k) {
    s += static_cast<std::int64_t>(out.width_vector[k + 1]) *
         (out.width_vector[k] + 1);
  }
  out.exact_size = s;
  out.size_bound = param_count_bound(out.max_width(), out.depth);
  return out;
}

NetworkPlan preset_plan(const CompositeSpec& spec, std::int64_t n, double p,
                        Preset preset) {
  if (n < 2) throw std::invalid_argument("preset_plan: n must be >= 2");
  const CompositeStats stats = composite_stats(spec);
  const double moment_factor = std::isinf(p) ? 1.0 : (1.0 - 1.0 / p);
  const double alpha = stats.aggregate_alpha;
  const double t = stats.aggregate_t;
  const double e_full = moment_factor * t / (4.0 * alpha + 2.0 * t);

  std::int64_t big_n = 1;
  std::int64_t big_l = 1;
  switch (preset) {
    case Preset::DeepFixedWidth:
      big_l = floor_power(n, e_full);
      break;
    case Preset::DeepWide:
      big_n = big_l = floor_power(n, e_full / 2.0);
      break;
    case Preset::FixedDepthWide:
      big_n = floor_power(n, e_full);
      break;
    default:
      throw std::invalid_argument("preset_plan: unknown preset");
  }
  big_n = std::max<std::int64_t>(big_n, 1);
  big_l = std::max<std::int64_t>(big_l, 1);

  std::size_t nonlinear_count = 0;
  for (const auto& l : spec.layers)
    if (!l.is_linear) ++nonlinear_count;
  std::vector<int> N(nonlinear_count, static_cast<int>(big_n));
  std::vector<int> L(nonlinear_count, static_cast<int>(big_l));
  NetworkPlan out = plan(spec, N, L);
  out.preset = preset;
  return out;
}

RateBound rate_bound(const CompositeSpec& spec, std::int64_t n, double p) {
  if (n < 3) throw std::invalid_argument("rate_bound: n must be >= 3");
  const CompositeStats stats = composite_stats(spec);
  const double moment_factor = std::isinf(p) ? 1.0 : (1.0 - 1.0 / p);
  RateBound out;
  out.exponent = moment_factor * 2.0 * stats.aggregate_alpha /
                 (2.0 * stats.aggregate_alpha + stats.aggregate_t);
  // Linear layers are realized exactly, so their arity does not enter the
  // dimension prefactor.
  double dd = 0.0;
  for (const auto& layer : spec.layers) {
    const double eff = layer.is_linear ? 1.0 : static_cast<double>(layer.arity);
    dd = std::max(dd, layer.d_in * eff);
  }
  const double dstar = stats.aggregate_d;
  out.prefactor = dstar * dstar * dd * dd * std::max(std::log(dd), std::log(2.0));
  out.log_power = 2;
  return out;
}

Mlp build_linear_relu(const Matrix& T, const Vector& u) {
  const Eigen::Index m = T.rows();
  const Eigen::Index d = T.cols();
  if (m < 1 || d < 1) throw std::invalid_argument("build_linear_relu: empty map");
  if (u.size() != m) throw std::invalid_argument("build_linear_relu: offset length mismatch");

  DenseLayer first;
  first.weights = Matrix::Zero(2 * d, d);
  first.bias = Vector::Zero(2 * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    first.weights(2 * k, k) = 1.0;
    first.weights(2 * k + 1, k) = -1.0;
  }

  DenseLayer second;
  second.weights = Matrix::Zero(m, 2 * d);
  second.bias = u;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      second.weights(i, 2 * k) = T(i, k);
      second.weights(i, 2 * k + 1) = -T(i, k);
    }
  }

  Mlp mlp;
  mlp.layers.push_back(std::move(first));
  mlp.layers.push_back(std::move(second));
  return mlp;
}

CompositeSpec single_index_spec(int d, double alpha, double lambda) {
  CompositeSpec spec;
  spec.layers.push_back({d, 1, d, 1.0, 1.0, true});
  spec.layers.push_back({1, 1, 1, alpha, lambda, false});
  return spec;
}

CompositeSpec additive_spec(int d, double alpha, double lambda) {
  CompositeSpec spec;
  spec.layers.push_back({d, d, 1, alpha, lambda, false});
  spec.layers.push_back({d, 1, d, 1.0, 1.0, true});
  return spec;
}

CompositeSpec additive_link_spec(int d, double alpha_component,
                                 double lambda_component, double alpha_link,
                                 double lambda_link) {
  CompositeSpec spec;
  spec.layers.push_back({d, d, 1, alpha_component, lambda_component, false});
  spec.layers.push_back({d, 1, d, 1.0, 1.0, true});
  spec.layers.push_back({1, 1, 1, alpha_link, lambda_link, false});
  return spec;
}

CompositeSpec interaction_spec(int d, int order, int num_terms, double alpha,
                               double lambda) {
  CompositeSpec spec;
  spec.layers.push_back({d, num_terms, order, alpha, lambda, false});
  spec.layers.push_back({num_terms, 1, num_terms, 1.0, 1.0, true});
  return spec;
}

CompositeSpec projection_pursuit_spec(int d, int num_ridges, double alpha,
                                      double lambda) {
  CompositeSpec spec;
  spec.layers.push_back({d, num_ridges, d, 1.0, 1.0, true});
  spec.layers.push_back({num_ridges, num_ridges, 1, alpha, lambda, false});
  spec.layers.push_back({num_ridges, 1, num_ridges, 1.0, 1.0, true});
  return spec;
}

CompositeSpec univariate_composite_spec(const std::vector<int>& ks,
                                        const std::vector<double>& alphas,
                                        const std::vector<double>& lambdas) {
  const std::size_t q = ks.size();
  if (q == 0) throw std::invalid_argument("univariate composite: no levels");
  if (alphas.size() != q + 1 || lambdas.size() != q + 1)
    throw std::invalid_argument("univariate composite: need q+1 smoothness entries");
  CompositeSpec spec;
  // ks = (K_1, ..., K_q); innermost bank has K_q components.
  for (std::size_t i = 0; i < q; ++i) {
    const int cur = ks[q - 1 - i];
    const int nxt = (i + 1 < q) ? ks[q - 2 - i] : 1;
    spec.layers.push_back({cur, cur, 1, alphas[i], lambdas[i], false});
    spec.layers.push_back({cur, nxt, cur, 1.0, 1.0, true});
  }
  spec.layers.push_back({1, 1, 1, alphas[q], lambdas[q], false});
  return spec;
}

CompositeSpec hierarchical_interaction_spec(int d, int order,
                                            const std::vector<int>& ks,
                                            double alpha, double lambda) {
  const std::size_t levels = ks.size();
  if (levels == 0) throw std::invalid_argument("hierarchical interaction: no levels");
  CompositeSpec spec;
  // Index projections feeding the outermost bank of K_l components.
  spec.layers.push_back({d, order * ks[levels - 1], d, 1.0, 1.0, true});
  for (std::size_t i = 0; i < levels; ++i) {
    const int cur = ks[levels - 1 - i];
    const int nxt = (i + 1 < levels) ? ks[levels - 2 - i] : 1;
    spec.layers.push_back({order * cur, cur, order, alpha, lambda, false});
    if (i + 1 < levels)
      spec.layers.push_back({cur, order * nxt, cur, 1.0, 1.0, true});
    else
      spec.layers.push_back({cur, 1, cur, 1.0, 1.0, true});
  }
  return spec;
}

std::string spec_to_json(const CompositeSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"d_in", l.d_in},
                      {"d_out", l.d_out},
                      {"t", l.arity},
                      {"alpha", l.holder_order},
                      {"lambda", l.holder_const},
                      {"is_linear", l.is_linear}});
  }
  return nlohmann::json{{"layers", layers}}.dump();
}

CompositeSpec spec_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  CompositeSpec spec;
  for (const auto& l : doc.at("layers")) {
    spec.layers.push_back({l.at("d_in").get<int>(), l.at("d_out").get<int>(),
                           l.at("t").get<int>(), l.at("alpha").get<double>(),
                           l.at("lambda").get<double>(),
                           l.at("is_linear").get<bool>()});
  }
  spec.validate();
  return spec;
}

std::string plan_to_json(const NetworkPlan& plan) {
  return nlohmann::json{{"width_vector", plan.width_vector},
                        {"width", plan.max_width()},
                        {"depth", plan.depth},
                        {"exact_size", plan.exact_size},
                        {"size_bound", plan.size_bound},
                        {"preset", preset_name(plan.preset)}}
      .dump(2);
}

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::Custom: return "custom";
    case Preset::DeepFixedWidth: return "deep_fixed_width";
    case Preset::DeepWide: return "deep_wide";
    case Preset::FixedDepthWide: return "fixed_depth_wide";
  }
  return "custom";
}

Preset preset_from_name(const std::string& name) {
  if (name == "custom") return Preset::Custom;
  if (name == "deep_fixed_width") return Preset::DeepFixedWidth;
  if (name == "deep_wide") return Preset::DeepWide;
  if (name == "fixed_depth_wide") return Preset::FixedDepthWide;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace dqr
