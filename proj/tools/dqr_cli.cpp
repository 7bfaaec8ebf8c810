// Command-line front end: scenario runs, architecture planning, curve
// emission, and a no-training verification pass.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dqr/eval.hpp"
#include "dqr/harness.hpp"
#include "dqr/oracle.hpp"
#include "dqr/planner.hpp"

namespace {

std::string read_spec_argument(const std::string& arg) {
  // Accepts either a path to a JSON file or inline JSON.
  std::error_code ec;
  if (std::filesystem::exists(arg, ec)) {
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open spec file " + arg);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  return arg;
}

int run_command(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed, std::optional<int> threads) {
  dqr::Scenario scenario = dqr::load_scenario(config_path);
  if (seed) scenario.master_seed = *seed;
#ifdef _OPENMP
  if (threads) omp_set_num_threads(*threads);
#else
  (void)threads;
#endif
  dqr::AggregateReport report = dqr::run_scenario(scenario);
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / "report.csv").string();
  dqr::emit_table(report, path);
  std::cout << dqr::table_to_csv(report);
  std::cerr << "wrote " << path << "\n";
  return 0;
}

int plan_command(const std::string& spec_arg, std::int64_t n, const std::string& p_arg,
                 const std::string& preset_arg) {
  dqr::CompositeSpec spec = dqr::spec_from_json(read_spec_argument(spec_arg));
  double p = dqr::kInfMoment;
  if (p_arg != "inf") {
    p = std::stod(p_arg);
    if (!(p > 1.0)) throw std::invalid_argument("--p must be > 1 or \"inf\"");
  }
  const dqr::Preset preset = dqr::preset_from_name(preset_arg);
  if (preset == dqr::Preset::Custom)
    throw std::invalid_argument("--preset must name a planning schedule");
  dqr::NetworkPlan plan = dqr::preset_plan(spec, n, p, preset);
  std::cout << dqr::plan_to_json(plan) << "\n";
  return 0;
}

int curves_command(const std::string& config_path, int grid,
                   const std::string& out_dir) {
  dqr::Scenario scenario = dqr::load_scenario(config_path);
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / "curves.csv").string();
  dqr::emit_curves(scenario, grid, path);
  std::cerr << "wrote " << path << "\n";
  return 0;
}

bool check(bool ok, const std::string& name) {
  std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
  return ok;
}

int verify_command() {
  bool all = true;

  // Quantile inverses round-trip through their CDFs.
  {
    bool ok = true;
    for (double tau : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
      ok = ok && std::abs(dqr::normal_cdf(dqr::normal_inv_cdf(tau)) - tau) < 1e-9;
      ok = ok && std::abs(dqr::t3_cdf(dqr::t3_inv_cdf(tau)) - tau) < 1e-9;
    }
    all = check(ok, "quantile inverses round-trip") && all;
  }

  // Check-loss identity rho_tau(r) + rho_{1-tau}(-r) = |r|.
  {
    bool ok = true;
    for (double r : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
      for (double tau : {0.1, 0.5, 0.9}) {
        dqr::Vector v(1);
        v << r;
        const double sum = dqr::pinball(v, tau) + dqr::pinball(v, 1.0 - tau);
        ok = ok && std::abs(sum - std::abs(r)) < 1e-12;
      }
    }
    all = check(ok, "check-loss reflection identity") && all;
  }

  // Exact ReLU realization of an affine map.
  {
    dqr::Matrix T(2, 3);
    T << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;
    dqr::Vector u(2);
    u << 0.25, -1.5;
    dqr::Mlp net = dqr::build_linear_relu(T, u);
    dqr::Rng rng(7);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
      dqr::Matrix x(1, 3);
      for (int j = 0; j < 3; ++j) x(0, j) = rng.uniform(-5.0, 5.0);
      dqr::Matrix out = dqr::forward(net, x);
      dqr::Vector expect = T * x.row(0).transpose() + u;
      ok = ok && (out.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12;
    }
    all = check(ok, "exact affine ReLU construction") && all;
  }

  // Serial and parallel reductions agree bitwise.
  {
    dqr::Rng rng(11);
    dqr::Vector v(100003);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    const double serial = dqr::chunked_mean(v, false);
    const double parallel = dqr::chunked_mean(v, true);
    all = check(serial == parallel, "deterministic parallel reduction") && all;
  }

  // Planner size accounting: exact size never exceeds the bound.
  {
    dqr::CompositeSpec spec = dqr::single_index_spec(6);
    bool ok = true;
    for (int N : {1, 2, 4})
      for (int L : {1, 2, 3}) {
        dqr::NetworkPlan plan = dqr::plan(spec, {N}, {L});
        ok = ok && plan.exact_size <= plan.size_bound;
      }
    all = check(ok, "plan size within closed-form bound") && all;
  }

  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep quantile regression laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "run a scenario and write the report CSV");
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--threads", threads, "worker thread count");

  std::string spec_arg, p_arg = "inf", preset_arg;
  std::int64_t n = 0;
  auto* plan = app.add_subcommand("plan", "print a network plan as JSON");
  plan->add_option("--spec", spec_arg, "composite spec (JSON file or inline)")->required();
  plan->add_option("--n", n, "sample size")->required();
  plan->add_option("--p", p_arg, "moment order (> 1) or \"inf\"");
  plan->add_option("--preset", preset_arg, "schedule name")->required();

  std::string curves_config;
  std::string curves_out_dir = ".";
  int grid = 201;
  auto* curves = app.add_subcommand("curves", "emit fitted quantile curves");
  curves->add_option("--config", curves_config, "scenario config JSON")->required();
  curves->add_option("--grid", grid, "grid points on [0,1]");
  curves->add_option("--out-dir", curves_out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "run the no-training property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, seed, threads);
    if (plan->parsed()) return plan_command(spec_arg, n, p_arg, preset_arg);
    if (curves->parsed()) return curves_command(curves_config, grid, curves_out_dir);
    if (verify->parsed()) return verify_command();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
