#ifndef DQR_EVAL_HPP
#define DQR_EVAL_HPP

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "dqr/datagen.hpp"
#include "dqr/oracle.hpp"

namespace dqr {

using Predictor = std::function<Vector(const Matrix&)>;

struct MetricSet {
  double excess_risk = 0.0;
  double l1 = 0.0;
  double l2sq = 0.0;
  double delta2 = 0.0;
  std::optional<double> crossing_rate;
};

/// Deterministic chunked mean: values are summed in fixed 4096-element
/// chunks and chunk sums combined left to right, so the serial and OpenMP
/// paths produce bit-identical results.
double chunked_mean(const Vector& values, bool parallel);
double chunked_mean_serial(const Vector& values);

/// Mean pinball loss of the predictions on the test set.
double empirical_risk(const Vector& predictions, const Dataset& testset, double tau);

/// Paired excess risk: mean over the test set of
/// rho_tau(y - f(x)) - rho_tau(y - f0^tau(x)).
double excess_risk(const Vector& predictions, const Vector& oracle_values,
                   const Dataset& testset, double tau, bool parallel = false);

double l1_distance(const Vector& predictions, const Vector& oracle_values,
                   bool parallel = false);
double l2sq_distance(const Vector& predictions, const Vector& oracle_values,
                     bool parallel = false);

/// Mean of min{|e|^2, |e|}; always <= l1 + l2sq.
double delta2(const Vector& predictions, const Vector& oracle_values,
              bool parallel = false);

/// Fraction of test points where predictions fail to be nondecreasing
/// across the (ascending) quantile levels.
double crossing_rate(const std::map<double, Vector>& predictions_by_tau);

MetricSet evaluate_metrics(const Vector& predictions, const Vector& oracle_values,
                           const Dataset& testset, double tau,
                           bool parallel = false);

/// Finite discrete (x, y) distribution with exact probabilities.
struct DiscreteDistribution {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> probs;  // sums to 1 over all (x, y) pairs
};

struct DecompositionCheck {
  double lhs = 0.0;  // R(f_hat) - R(f0)
  double rhs = 0.0;  // 2 sup_f |R(f) - R_n(f)| + inf_f R(f) - R(f0)
  bool holds = false;
};

/// Brute-force check of the excess-risk decomposition on a finite class of
/// univariate functions over a finite discrete population. f0 is the exact
/// population tau-quantile restricted to the support.
DecompositionCheck verify_erm_decomposition(
    const std::vector<std::function<double(double)>>& candidates,
    const DiscreteDistribution& population, const Dataset& sample, double tau);

}  // namespace dqr

#endif  // DQR_EVAL_HPP
