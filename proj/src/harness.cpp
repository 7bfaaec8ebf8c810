#include "dqr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dqr/planner.hpp"

namespace dqr {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end()) {
      throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
    }
  }
}

// Metric values keyed by the CSV metric name, for one replication.
struct CellValues {
  std::vector<std::pair<std::string, double>> entries;
};

std::vector<std::pair<std::string, double>> metric_entries(const MetricSet& m) {
  std::vector<std::pair<std::string, double>> out = {
      {"delta2", m.delta2},
      {"excess_risk", m.excess_risk},
      {"l1", m.l1},
      {"l2sq", m.l2sq},
  };
  if (m.crossing_rate) out.emplace_back("crossing_rate", *m.crossing_rate);
  std::sort(out.begin(), out.end());
  return out;
}

// Per-replication results keyed by (tau, method); deterministic map order.
using RepResult = std::map<std::pair<double, Method>, MetricSet>;

RepResult run_one_replication(const Scenario& sc, int rep, const Dataset* shared_test) {
  Rng train_rng(derive_seed(sc.master_seed, rep, 0));
  Dataset train = sample(sc.model, sc.error, sc.n_train, train_rng);

  Dataset local_test;
  const Dataset* test = shared_test;
  if (test == nullptr) {
    Rng test_rng(derive_seed(sc.master_seed, rep, 1));
    local_test = sample(sc.model, sc.error, sc.n_test, test_rng);
    test = &local_test;
  }

  const std::vector<int> widths = sc.effective_net_widths();
  RepResult out;

  for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
    const Method method = sc.methods[mi];
    if (method == Method::DLS) {
      // One squared-loss fit per replication, reported against the median
      // oracle (the conditional mean coincides with the median for the
      // symmetric error models, so the comparison is meaningful).
      TrainConfig cfg = sc.train_cfg;
      cfg.seed = derive_seed(sc.master_seed, rep, 2 + 64 * mi);
      TrainResult fit = fit_dls(train, widths, cfg);
      QuantileOracle oracle{sc.model, sc.error};
      Vector truth = oracle.evaluate(0.5, test->X);
      Vector preds = predict(fit.mlp, test->X);
      out[{0.5, method}] = evaluate_metrics(preds, truth, *test, 0.5);
      continue;
    }

    std::map<double, Vector> preds_by_tau;
    for (std::size_t ti = 0; ti < sc.taus.size(); ++ti) {
      const double tau = sc.taus[ti];
      TrainConfig cfg = sc.train_cfg;
      cfg.seed = derive_seed(sc.master_seed, rep, 2 + 64 * mi + ti);
      Vector preds;
      if (method == Method::DQR) {
        Rng init_rng(cfg.seed);
        Mlp mlp = init(widths, init_rng);
        TrainResult fit =
            dqr::train(std::move(mlp), train.X, train.y, PinballObjective{tau}, cfg);
        preds = predict(fit.mlp, test->X);
      } else {
        AffineModel model = fit_linear_qr(train, tau, cfg);
        preds = model.predict(test->X);
      }
      QuantileOracle oracle{sc.model, sc.error};
      Vector truth = oracle.evaluate(tau, test->X);
      out[{tau, method}] = evaluate_metrics(preds, truth, *test, tau);
      preds_by_tau[tau] = std::move(preds);
    }
    if (sc.taus.size() >= 2) {
      const double rate = crossing_rate(preds_by_tau);
      for (double tau : sc.taus) out[{tau, method}].crossing_rate = rate;
    }
  }
  return out;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::DQR: return "dqr";
    case Method::LinearQR: return "linear_qr";
    case Method::DLS: return "dls";
  }
  throw std::invalid_argument("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "dqr") return Method::DQR;
  if (name == "linear_qr") return Method::LinearQR;
  if (name == "dls") return Method::DLS;
  throw std::invalid_argument("method_from_name: unknown method \"" + name + "\"");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                          std::uint64_t purpose) {
  std::uint64_t state = master;
  splitmix64(state);
  state ^= 0x9e3779b97f4a7c15ULL * (replication + 1);
  splitmix64(state);
  state ^= 0xbf58476d1ce4e5b9ULL * (purpose + 1);
  return splitmix64(state);
}

std::vector<int> Scenario::effective_net_widths() const {
  if (!net_widths.empty()) return net_widths;
  const int d = model_dim(model);
  return {d, 64, 64, 64, 1};
}

void Scenario::validate() const {
  if (taus.empty()) throw std::invalid_argument("scenario: taus must be nonempty");
  double prev = 0.0;
  for (double tau : taus) {
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("scenario: taus must lie in (0, 1)");
    if (tau <= prev)
      throw std::invalid_argument("scenario: taus must be strictly increasing");
    prev = tau;
  }
  if (replications < 1) throw std::invalid_argument("scenario: replications must be >= 1");
  if (n_train < 4) throw std::invalid_argument("scenario: n_train must be >= 4");
  if (n_test < 1) throw std::invalid_argument("scenario: n_test must be >= 1");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j])
        throw std::invalid_argument("scenario: duplicate method in list");
  const std::vector<int> widths = effective_net_widths();
  if (widths.size() < 2 || widths.front() != model_dim(model) || widths.back() != 1)
    throw std::invalid_argument(
        "scenario: net widths must run from the covariate dimension to 1");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("scenario: net widths must be positive");
}

const ReportRow& AggregateReport::find(double tau, Method method,
                                       const std::string& metric) const {
  for (const ReportRow& row : rows) {
    if (row.tau == tau && row.method == method && row.metric == metric) return row;
  }
  throw std::out_of_range("AggregateReport::find: no row for tau=" + fmt17(tau) +
                          " method=" + method_name(method) + " metric=" + metric);
}

AggregateReport run_scenario(const Scenario& scenario) {
  scenario.validate();
  const int R = scenario.replications;

  Dataset shared_test;
  const Dataset* shared_ptr = nullptr;
  if (scenario.shared_test_set) {
    Rng test_rng(derive_seed(scenario.master_seed, 0, 1));
    shared_test = sample(scenario.model, scenario.error, scenario.n_test, test_rng);
    shared_ptr = &shared_test;
  }

  std::vector<RepResult> results(static_cast<std::size_t>(R));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(R));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int rep = 0; rep < R; ++rep) {
    try {
      results[static_cast<std::size_t>(rep)] =
          run_one_replication(scenario, rep, shared_ptr);
    } catch (...) {
      failures[static_cast<std::size_t>(rep)] = std::current_exception();
    }
  }
  for (int rep = 0; rep < R; ++rep) {
    if (failures[static_cast<std::size_t>(rep)]) {
      try {
        std::rethrow_exception(failures[static_cast<std::size_t>(rep)]);
      } catch (const std::exception& e) {
        throw std::runtime_error("replication " + std::to_string(rep) +
                                 " failed: " + e.what());
      }
    }
  }

  // Aggregate in replication-index order; cells are keyed identically in
  // every replication, so the row set comes from replication 0.
  AggregateReport report;
  report.scenario = scenario;
  for (const auto& [key, metrics0] : results[0]) {
    for (const auto& [metric, first_value] : metric_entries(metrics0)) {
      (void)first_value;
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(R));
      for (int rep = 0; rep < R; ++rep) {
        const RepResult& rr = results[static_cast<std::size_t>(rep)];
        auto it = rr.find(key);
        if (it == rr.end())
          throw std::runtime_error("replication " + std::to_string(rep) +
                                   " failed: missing metric cell");
        for (const auto& [name, value] : metric_entries(it->second))
          if (name == metric) values.push_back(value);
      }
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double sd = 0.0;
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
      }
      ReportRow row;
      row.tau = key.first;
      row.method = key.second;
      row.metric = metric;
      row.mean = mean;
      row.std_dev = sd;
      report.rows.push_back(std::move(row));
    }
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) {
              if (a.tau != b.tau) return a.tau < b.tau;
              const std::string an = method_name(a.method);
              const std::string bn = method_name(b.method);
              if (an != bn) return an < bn;
              return a.metric < b.metric;
            });
  return report;
}

std::string table_to_csv(const AggregateReport& report) {
  std::ostringstream out;
  out << "model,error,n,tau,method,metric,mean,std\n";
  const std::string model = model_name(report.scenario.model);
  const std::string error = error_name(report.scenario.error);
  for (const ReportRow& row : report.rows) {
    out << model << ',' << error << ',' << report.scenario.n_train << ','
        << fmt17(row.tau) << ',' << method_name(row.method) << ',' << row.metric
        << ',' << fmt17(row.mean) << ',' << fmt17(row.std_dev) << '\n';
  }
  return out.str();
}

void emit_table(const AggregateReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_table: cannot open " + path);
  out << table_to_csv(report);
  if (!out) throw std::runtime_error("emit_table: write failed for " + path);
}

void emit_curves(const Scenario& scenario,
                 const std::map<double, Predictor>& fitted, int grid_size,
                 const std::string& path) {
  if (!model_is_univariate(scenario.model))
    throw std::invalid_argument("emit_curves: model must be univariate");
  if (grid_size < 2) throw std::invalid_argument("emit_curves: grid_size must be >= 2");
  Matrix grid(grid_size, 1);
  for (int i = 0; i < grid_size; ++i)
    grid(i, 0) = static_cast<double>(i) / static_cast<double>(grid_size - 1);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_curves: cannot open " + path);
  out << "x,tau,y_hat,y_true\n";
  QuantileOracle oracle{scenario.model, scenario.error};
  for (const auto& [tau, predictor] : fitted) {
    Vector y_hat = predictor(grid);
    Vector y_true = oracle.evaluate(tau, grid);
    if (y_hat.size() != grid_size)
      throw std::invalid_argument("emit_curves: predictor returned wrong length");
    for (int i = 0; i < grid_size; ++i) {
      out << fmt17(grid(i, 0)) << ',' << fmt17(tau) << ',' << fmt17(y_hat(i))
          << ',' << fmt17(y_true(i)) << '\n';
    }
  }
  if (!out) throw std::runtime_error("emit_curves: write failed for " + path);
}

void emit_curves(const Scenario& scenario, int grid_size, const std::string& path) {
  scenario.validate();
  if (!model_is_univariate(scenario.model))
    throw std::invalid_argument("emit_curves: model must be univariate");

  Rng train_rng(derive_seed(scenario.master_seed, 0, 0));
  Dataset train = sample(scenario.model, scenario.error, scenario.n_train, train_rng);
  const std::vector<int> widths = scenario.effective_net_widths();

  std::map<double, Predictor> fitted;
  for (std::size_t ti = 0; ti < scenario.taus.size(); ++ti) {
    const double tau = scenario.taus[ti];
    TrainConfig cfg = scenario.train_cfg;
    cfg.seed = derive_seed(scenario.master_seed, 0, 2 + ti);
    Rng init_rng(cfg.seed);
    Mlp mlp = init(widths, init_rng);
    TrainResult fit =
        dqr::train(std::move(mlp), train.X, train.y, PinballObjective{tau}, cfg);
    auto net = std::make_shared<Mlp>(std::move(fit.mlp));
    fitted[tau] = [net](const Matrix& X) { return predict(*net, X); };
  }
  emit_curves(scenario, fitted, grid_size, path);
}

namespace {

std::vector<int> parse_net(const json& net, const Scenario& sc) {
  reject_unknown_keys(net, {"widths", "preset", "spec", "p", "reference"},
                      "net");
  const bool has_widths = net.contains("widths");
  const bool has_preset = net.contains("preset");
  const bool has_reference = net.contains("reference");
  if (static_cast<int>(has_widths) + static_cast<int>(has_preset) +
          static_cast<int>(has_reference) != 1)
    throw std::invalid_argument(
        "config: net must have exactly one of widths, preset, reference");

  if (has_reference) {
    if (!net["reference"].is_boolean() || !net["reference"].get<bool>())
      throw std::invalid_argument(
          "config: net.reference must be true when present");
    return {model_dim(sc.model), 256, 256, 256, 256, 1};
  }
  if (has_widths) {
    if (!net["widths"].is_array())
      throw std::invalid_argument("config: net.widths must be an array");
    std::vector<int> widths;
    for (const auto& w : net["widths"]) {
      if (!w.is_number_integer())
        throw std::invalid_argument("config: net.widths entries must be integers");
      widths.push_back(w.get<int>());
    }
    return widths;
  }
  // Planner preset: resolve the width plan for n_train now.
  if (!net.contains("spec"))
    throw std::invalid_argument("config: net.preset requires net.spec");
  const Preset preset = preset_from_name(net["preset"].get<std::string>());
  if (preset == Preset::Custom)
    throw std::invalid_argument("config: net.preset must name a planner preset");
  CompositeSpec spec = spec_from_json(net["spec"].dump());
  double p = std::numeric_limits<double>::infinity();
  if (net.contains("p")) {
    if (net["p"].is_string()) {
      if (net["p"].get<std::string>() != "inf")
        throw std::invalid_argument("config: net.p string value must be \"inf\"");
    } else {
      p = net["p"].get<double>();
    }
  }
  NetworkPlan net_plan = preset_plan(spec, sc.n_train, p, preset);
  return net_plan.width_vector;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json cfg = json::parse(text);
  if (!cfg.is_object()) throw std::invalid_argument("config: root must be an object");
  reject_unknown_keys(cfg,
                      {"schema_version", "model", "error", "n_train", "n_test",
                       "taus", "replications", "methods", "net", "train",
                       "master_seed", "shared_test_set"},
                      "root");
  if (!cfg.contains("schema_version") || !cfg["schema_version"].is_number_integer() ||
      cfg["schema_version"].get<int>() != 1)
    throw std::invalid_argument("config: schema_version must be the integer 1");

  Scenario sc;
  if (cfg.contains("model")) sc.model = model_from_name(cfg["model"].get<std::string>());
  if (cfg.contains("error")) sc.error = error_from_name(cfg["error"].get<std::string>());
  if (cfg.contains("n_train")) sc.n_train = cfg["n_train"].get<Eigen::Index>();
  if (cfg.contains("n_test")) sc.n_test = cfg["n_test"].get<Eigen::Index>();
  if (cfg.contains("taus")) {
    sc.taus.clear();
    for (const auto& t : cfg["taus"]) sc.taus.push_back(t.get<double>());
  }
  if (cfg.contains("replications")) sc.replications = cfg["replications"].get<int>();
  if (cfg.contains("methods")) {
    sc.methods.clear();
    for (const auto& m : cfg["methods"])
      sc.methods.push_back(method_from_name(m.get<std::string>()));
  }
  if (cfg.contains("train")) {
    const json& tr = cfg["train"];
    reject_unknown_keys(tr, {"epochs", "batch_size", "lr", "beta1", "beta2", "eps"},
                        "train");
    if (tr.contains("epochs")) sc.train_cfg.epochs = tr["epochs"].get<int>();
    if (tr.contains("batch_size")) sc.train_cfg.batch_size = tr["batch_size"].get<int>();
    if (tr.contains("lr")) sc.train_cfg.adam.lr = tr["lr"].get<double>();
    if (tr.contains("beta1")) sc.train_cfg.adam.beta1 = tr["beta1"].get<double>();
    if (tr.contains("beta2")) sc.train_cfg.adam.beta2 = tr["beta2"].get<double>();
    if (tr.contains("eps")) sc.train_cfg.adam.eps = tr["eps"].get<double>();
  }
  if (cfg.contains("master_seed")) sc.master_seed = cfg["master_seed"].get<std::uint64_t>();
  if (cfg.contains("shared_test_set")) sc.shared_test_set = cfg["shared_test_set"].get<bool>();
  if (cfg.contains("net")) sc.net_widths = parse_net(cfg["net"], sc);

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace dqr
