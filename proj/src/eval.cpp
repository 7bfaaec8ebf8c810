#include "dqr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dqr {

namespace {

constexpr Eigen::Index kChunk = 4096;

double rho(double r, double tau) { return r * (tau - (r <= 0.0 ? 1.0 : 0.0)); }

void check_sizes(const Vector& a, const Vector& b, const char* who) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument(std::string(who) + ": size mismatch or empty input");
}

}  // namespace

double chunked_mean(const Vector& values, bool parallel) {
  const Eigen::Index n = values.size();
  if (n == 0) throw std::invalid_argument("chunked_mean: empty input");
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && chunks > 1)
#endif
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index lo = c * kChunk;
    const Eigen::Index hi = std::min(n, lo + kChunk);
    double s = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) s += values(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  (void)parallel;
  return total / static_cast<double>(n);
}

double chunked_mean_serial(const Vector& values) { return chunked_mean(values, false); }

double empirical_risk(const Vector& predictions, const Dataset& testset, double tau) {
  check_sizes(predictions, testset.y, "empirical_risk");
  Vector losses(predictions.size());
  for (Eigen::Index i = 0; i < predictions.size(); ++i)
    losses(i) = rho(testset.y(i) - predictions(i), tau);
  return chunked_mean_serial(losses);
}

double excess_risk(const Vector& predictions, const Vector& oracle_values,
                   const Dataset& testset, double tau, bool parallel) {
  check_sizes(predictions, oracle_values, "excess_risk");
  check_sizes(predictions, testset.y, "excess_risk");
  Vector diffs(predictions.size());
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    diffs(i) = rho(testset.y(i) - predictions(i), tau) -
               rho(testset.y(i) - oracle_values(i), tau);
  }
  return chunked_mean(diffs, parallel);
}

double l1_distance(const Vector& predictions, const Vector& oracle_values, bool parallel) {
  check_sizes(predictions, oracle_values, "l1_distance");
  Vector abs_err = (predictions - oracle_values).cwiseAbs();
  return chunked_mean(abs_err, parallel);
}

double l2sq_distance(const Vector& predictions, const Vector& oracle_values, bool parallel) {
  check_sizes(predictions, oracle_values, "l2sq_distance");
  Vector sq_err = (predictions - oracle_values).cwiseAbs2();
  return chunked_mean(sq_err, parallel);
}

double delta2(const Vector& predictions, const Vector& oracle_values, bool parallel) {
  check_sizes(predictions, oracle_values, "delta2");
  Vector vals(predictions.size());
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    const double e = std::abs(predictions(i) - oracle_values(i));
    vals(i) = std::min(e * e, e);
  }
  return chunked_mean(vals, parallel);
}

double crossing_rate(const std::map<double, Vector>& predictions_by_tau) {
  if (predictions_by_tau.size() < 2)
    throw std::invalid_argument("crossing_rate: need at least 2 quantile levels");
  const Eigen::Index n = predictions_by_tau.begin()->second.size();
  Eigen::Index crossings = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double prev = -std::numeric_limits<double>::infinity();
    bool crossed = false;
    for (const auto& [tau, preds] : predictions_by_tau) {
      if (preds.size() != n)
        throw std::invalid_argument("crossing_rate: prediction length mismatch");
      if (preds(i) < prev) crossed = true;
      prev = preds(i);
    }
    if (crossed) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(n);
}

MetricSet evaluate_metrics(const Vector& predictions, const Vector& oracle_values,
                           const Dataset& testset, double tau, bool parallel) {
  MetricSet m;
  m.excess_risk = excess_risk(predictions, oracle_values, testset, tau, parallel);
  m.l1 = l1_distance(predictions, oracle_values, parallel);
  m.l2sq = l2sq_distance(predictions, oracle_values, parallel);
  m.delta2 = delta2(predictions, oracle_values, parallel);
  return m;
}

namespace {

// Exact population risk over the discrete distribution.
double population_risk(const std::function<double(double)>& f,
                       const DiscreteDistribution& pop, double tau) {
  double risk = 0.0;
  for (std::size_t i = 0; i < pop.xs.size(); ++i)
    risk += pop.probs[i] * rho(pop.ys[i] - f(pop.xs[i]), tau);
  return risk;
}

double sample_risk(const std::function<double(double)>& f, const Dataset& sample,
                   double tau) {
  double risk = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i)
    risk += rho(sample.y(i) - f(sample.X(i, 0)), tau);
  return risk / static_cast<double>(sample.size());
}

}  // namespace

DecompositionCheck verify_erm_decomposition(
    const std::vector<std::function<double(double)>>& candidates,
    const DiscreteDistribution& population, const Dataset& sample, double tau) {
  if (candidates.empty())
    throw std::invalid_argument("verify_erm_decomposition: empty candidate list");
  if (population.xs.size() != population.ys.size() ||
      population.xs.size() != population.probs.size() || population.xs.empty())
    throw std::invalid_argument("verify_erm_decomposition: malformed population");

  // f0: exact conditional tau-quantile on each support point. For each
  // distinct x, pick the smallest y whose conditional CDF reaches tau.
  std::vector<double> support_x = population.xs;
  std::sort(support_x.begin(), support_x.end());
  support_x.erase(std::unique(support_x.begin(), support_x.end()), support_x.end());
  std::map<double, double> quantile_at;
  for (double x : support_x) {
    std::vector<std::pair<double, double>> cond;  // (y, prob)
    double mass = 0.0;
    for (std::size_t i = 0; i < population.xs.size(); ++i) {
      if (population.xs[i] == x) {
        cond.emplace_back(population.ys[i], population.probs[i]);
        mass += population.probs[i];
      }
    }
    std::sort(cond.begin(), cond.end());
    double cum = 0.0;
    double q = cond.back().first;
    for (const auto& [y, p] : cond) {
      cum += p / mass;
      if (cum >= tau - 1e-15) { q = y; break; }
    }
    quantile_at[x] = q;
  }
  auto f0 = [&quantile_at](double x) {
    auto it = quantile_at.find(x);
    if (it == quantile_at.end())
      throw std::invalid_argument("verify_erm_decomposition: sample x outside support");
    return it->second;
  };

  // Empirical minimizer over the candidates.
  std::size_t best = 0;
  double best_emp = std::numeric_limits<double>::infinity();
  double sup_gap = 0.0;
  double inf_pop = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double emp = sample_risk(candidates[i], sample, tau);
    const double pop = population_risk(candidates[i], population, tau);
    if (emp < best_emp) { best_emp = emp; best = i; }
    sup_gap = std::max(sup_gap, std::abs(pop - emp));
    inf_pop = std::min(inf_pop, pop);
  }
  const double r0 = population_risk(f0, population, tau);

  DecompositionCheck out;
  out.lhs = population_risk(candidates[best], population, tau) - r0;
  out.rhs = 2.0 * sup_gap + (inf_pop - r0);
  out.holds = out.lhs <= out.rhs + 1e-12;
  return out;
}

}  // namespace dqr
