#ifndef DQR_PLANNER_HPP
#define DQR_PLANNER_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dqr/net.hpp"

namespace dqr {

/// One component h_i of a composite target function. A component maps
/// d_in coordinates to d_out outputs; each output depends on at most
/// `arity` inputs and is Holder(holder_order, holder_const). Linear
/// components are realized exactly and carry order = const = 1.
struct LayerSpec {
  int d_in = 1;
  int d_out = 1;
  int arity = 1;
  double holder_order = 1.0;
  double holder_const = 1.0;
  bool is_linear = false;
};

struct CompositeSpec {
  std::vector<LayerSpec> layers;

  int ambient_dim() const { return layers.front().d_in; }
  /// Throws on broken chaining, out-of-range orders, etc.
  void validate() const;
};

/// Smoothness-driven constants per component plus the aggregates that drive
/// the rate: (alpha*, t*) minimizing alpha_i*/t_i over nonlinear layers,
/// lambda* = max lambda_i*, d* = max t_i*.
struct CompositeStats {
  std::vector<double> c_star;       // 18^(prod_{j>i} alpha_j)
  std::vector<double> lambda_star;  // prod_{j>=i} lambda_j^(prod_{k>j} alpha_k)
  std::vector<double> alpha_star;   // prod_{j>=i} alpha_j
  std::vector<double> t_star;       // prod_{j>=i} sqrt(t_j)^(prod_{k>=j} alpha_k) / sqrt(t_i)^alpha_i
  double aggregate_alpha = 1.0;
  double aggregate_t = 1.0;
  double aggregate_lambda = 1.0;
  double aggregate_d = 1.0;
};

CompositeStats composite_stats(const CompositeSpec& spec);

enum class Preset { Custom, DeepFixedWidth, DeepWide, FixedDepthWide };

struct NetworkPlan {
  std::vector<int> width_vector;  // full list: input, hidden..., output
  int depth = 0;                  // number of hidden layers
  std::int64_t exact_size = 0;
  std::int64_t size_bound = 0;
  Preset preset = Preset::Custom;

  int max_width() const;
};

/// Architecture for given per-nonlinear-layer subnetwork parameters N, L
/// (indexed over nonlinear layers in composition order). Nonlinear layer i
/// becomes 12L_i+15 hidden layers of width
/// d_i * max{4 t_i floor(N_i^(1/t_i)) + 3 t_i, 12 N_i + 8}; a linear layer
/// becomes the exact 3-layer block of widths (d_in, 2 d_in, d_out).
NetworkPlan plan(const CompositeSpec& spec, const std::vector<int>& N,
                 const std::vector<int>& L);

inline constexpr double kInfMoment = std::numeric_limits<double>::infinity();

/// The three named width/depth schedules; N and L are derived from
/// (n, p, alpha*, t*) and any value below 1 is raised to 1.
NetworkPlan preset_plan(const CompositeSpec& spec, std::int64_t n, double p,
                        Preset preset);

struct RateBound {
  double exponent = 0.0;    // (1 - 1/p) * 2 alpha* / (2 alpha* + t*)
  double prefactor = 0.0;   // (d*)^2 (max_i d_i t_i)^2 log(max_i d_i t_i)
  int log_power = 2;
};

RateBound rate_bound(const CompositeSpec& spec, std::int64_t n, double p);

/// Exact ReLU realization of x -> T x + u with widths (d, 2d, m).
Mlp build_linear_relu(const Matrix& T, const Vector& u);

/// Named composite structures for the standard model families.
CompositeSpec single_index_spec(int d, double alpha = 1.0, double lambda = 1.0);
CompositeSpec additive_spec(int d, double alpha = 1.0, double lambda = 1.0);
CompositeSpec additive_link_spec(int d, double alpha_component = 1.0,
                                 double lambda_component = 1.0,
                                 double alpha_link = 1.0,
                                 double lambda_link = 1.0);
CompositeSpec interaction_spec(int d, int order, int num_terms,
                               double alpha = 1.0, double lambda = 1.0);
CompositeSpec projection_pursuit_spec(int d, int num_ridges,
                                      double alpha = 1.0, double lambda = 1.0);
CompositeSpec univariate_composite_spec(const std::vector<int>& ks,
                                        const std::vector<double>& alphas,
                                        const std::vector<double>& lambdas);
CompositeSpec hierarchical_interaction_spec(int d, int order,
                                            const std::vector<int>& ks,
                                            double alpha = 1.0,
                                            double lambda = 1.0);

/// JSON document round-trip for CompositeSpec:
/// {"layers":[{"d_in":6,"d_out":1,"t":6,"alpha":1.0,"lambda":1.0,"is_linear":true},...]}
std::string spec_to_json(const CompositeSpec& spec);
CompositeSpec spec_from_json(const std::string& text);

std::string plan_to_json(const NetworkPlan& plan);
std::string preset_name(Preset preset);
Preset preset_from_name(const std::string& name);

}  // namespace dqr

#endif  // DQR_PLANNER_HPP
