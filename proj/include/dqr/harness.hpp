#ifndef DQR_HARNESS_HPP
#define DQR_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dqr/baselines.hpp"
#include "dqr/datagen.hpp"
#include "dqr/eval.hpp"
#include "dqr/loss.hpp"

namespace dqr {

enum class Method { DQR, LinearQR, DLS };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct Scenario {
  RegressionModel model = RegressionModel::Linear1D;
  ErrorModel error = ErrorModel::ScaledT3;
  Eigen::Index n_train = 128;
  Eigen::Index n_test = 100000;
  std::vector<double> taus = {0.25, 0.5, 0.75};
  int replications = 10;
  std::vector<Method> methods = {Method::DQR, Method::LinearQR};
  std::vector<int> net_widths;  // empty: (d, 64, 64, 64, 1)
  TrainConfig train_cfg;
  std::uint64_t master_seed = 1;
  bool shared_test_set = false;  // default: fresh test set per replication

  std::vector<int> effective_net_widths() const;
  void validate() const;
};

struct ReportRow {
  double tau = 0.0;
  Method method = Method::DQR;
  std::string metric;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct AggregateReport {
  Scenario scenario;
  std::vector<ReportRow> rows;  // deterministic order: tau, method, metric

  const ReportRow& find(double tau, Method method, const std::string& metric) const;
};

/// Runs all replications (OpenMP across replications when enabled) and
/// aggregates mean/std per (tau, method, metric). Deterministic for a
/// fixed master seed regardless of thread count.
AggregateReport run_scenario(const Scenario& scenario);

/// CSV columns model,error,n,tau,method,metric,mean,std; values printed
/// with 17 significant digits.
void emit_table(const AggregateReport& report, const std::string& path);
std::string table_to_csv(const AggregateReport& report);

/// Fits each method once (replication 0 streams) and writes the fitted
/// curves over an equispaced grid on [0,1]: columns x,tau,y_hat,y_true.
/// Univariate models only.
void emit_curves(const Scenario& scenario, int grid_size, const std::string& path);

/// Curve emission for externally supplied predictors.
void emit_curves(const Scenario& scenario,
                 const std::map<double, Predictor>& fitted, int grid_size,
                 const std::string& path);

/// JSON config with a schema_version field; unknown keys are rejected.
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Derived 64-bit seed for (replication, purpose) substreams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                          std::uint64_t purpose);

}  // namespace dqr

#endif  // DQR_HARNESS_HPP
