// Compares the serial reference reduction against the OpenMP path on the
// metric kernels and asserts bitwise agreement while timing both.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dqr/datagen.hpp"
#include "dqr/eval.hpp"
#include "dqr/oracle.hpp"
#include "dqr/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  Eigen::Index n = 4000000;
  int repeats = 20;
  if (argc > 1) n = std::atoll(argv[1]);
  if (argc > 2) repeats = std::atoi(argv[2]);

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled at build time\n");
#endif
  std::printf("points: %lld, repeats: %d\n", static_cast<long long>(n), repeats);

  dqr::Rng rng(12345);
  dqr::Dataset test = dqr::sample(dqr::RegressionModel::Wave,
                                  dqr::ErrorModel::ScaledT3, n, rng);
  dqr::QuantileOracle oracle{dqr::RegressionModel::Wave, dqr::ErrorModel::ScaledT3};
  dqr::Vector truth = oracle.evaluate(0.5, test.X);
  // A deliberately imperfect predictor so every kernel has real work.
  dqr::Vector preds = truth;
  for (Eigen::Index i = 0; i < n; ++i) preds(i) += 0.05 * rng.normal();

  bool identical = true;
  double serial_time = 0.0, parallel_time = 0.0;
  dqr::MetricSet serial_metrics, parallel_metrics;

  for (int r = 0; r < repeats; ++r) {
    auto t0 = Clock::now();
    serial_metrics = dqr::evaluate_metrics(preds, truth, test, 0.5, false);
    serial_time += seconds_since(t0);

    t0 = Clock::now();
    parallel_metrics = dqr::evaluate_metrics(preds, truth, test, 0.5, true);
    parallel_time += seconds_since(t0);

    identical = identical &&
                serial_metrics.excess_risk == parallel_metrics.excess_risk &&
                serial_metrics.l1 == parallel_metrics.l1 &&
                serial_metrics.l2sq == parallel_metrics.l2sq &&
                serial_metrics.delta2 == parallel_metrics.delta2;
  }

  std::printf("serial:   %.4f s total (%.4f s/iter)\n", serial_time,
              serial_time / repeats);
  std::printf("parallel: %.4f s total (%.4f s/iter)\n", parallel_time,
              parallel_time / repeats);
  std::printf("speedup:  %.2fx\n", serial_time / parallel_time);
  std::printf("excess_risk=%.17g l1=%.17g l2sq=%.17g delta2=%.17g\n",
              serial_metrics.excess_risk, serial_metrics.l1, serial_metrics.l2sq,
              serial_metrics.delta2);
  if (!identical) {
    std::printf("FAIL: serial and parallel metrics differ\n");
    return 1;
  }
  std::printf("serial and parallel metrics are bitwise identical\n");
  return 0;
}
