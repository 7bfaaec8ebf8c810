#include <doctest.h>

#include <cmath>
#include <functional>

#include "dqr/loss.hpp"
#include "dqr/oracle.hpp"

using namespace dqr;

namespace {

// Independent bisection inversion of a monotone CDF.
double bisect_inverse(const std::function<double(double)>& cdf, double tau,
                      double lo, double hi) {
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < tau)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

const RegressionModel kUnivariate[] = {RegressionModel::Linear1D,
                                       RegressionModel::Wave,
                                       RegressionModel::Triangle};
const ErrorModel kErrors[] = {ErrorModel::ScaledT3, ErrorModel::SineHetero,
                              ErrorModel::ExpHetero};

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("normal inverse CDF against a bisection oracle") {
  CHECK(normal_inv_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_inv_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_inv_cdf(0.75) == doctest::Approx(0.674490).epsilon(1e-6));
  for (double tau = 0.001; tau < 1.0; tau += 0.013) {
    const double ref = bisect_inverse(normal_cdf, tau, -15.0, 15.0);
    CHECK(std::abs(normal_inv_cdf(tau) - ref) <= 1e-9);
  }
  CHECK_THROWS_AS(normal_inv_cdf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_inv_cdf(1.0), std::invalid_argument);
}

TEST_CASE("t(3) inverse CDF: accuracy, symmetry, residual tolerance") {
  CHECK(t3_inv_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t3_inv_cdf(0.95) == doctest::Approx(2.353363).epsilon(1e-4));
  const double ref = bisect_inverse(t3_cdf, 0.95, -50.0, 50.0);
  CHECK(std::abs(t3_inv_cdf(0.95) - ref) <= 1e-8);
  for (double tau = 0.01; tau < 0.5; tau += 0.037) {
    CHECK(std::abs(t3_inv_cdf(tau) + t3_inv_cdf(1.0 - tau)) <= 1e-10);
    CHECK(std::abs(t3_cdf(t3_inv_cdf(tau)) - tau) <= 1e-10);
  }
}

TEST_CASE("conditional quantiles match hand values") {
  QuantileOracle wave_sine{RegressionModel::Wave, ErrorModel::SineHetero};
  Vector x(1);
  x << 0.3;
  CHECK(wave_sine(0.5, x) ==
        doctest::Approx(0.6 * std::sin(1.2 * M_PI)).epsilon(1e-9));

  QuantileOracle tri_exp{RegressionModel::Triangle, ErrorModel::ExpHetero};
  x << 0.5;
  CHECK(tri_exp(0.75, x) == doctest::Approx(4.0 + 0.337245).epsilon(1e-5));

  QuantileOracle lin_t3{RegressionModel::Linear1D, ErrorModel::ScaledT3};
  x << 1.0;
  CHECK(lin_t3(0.95, x) == doctest::Approx(3.176681).epsilon(1e-5));
}

TEST_CASE("median under any symmetric error equals f0") {
  for (RegressionModel m : kUnivariate) {
    for (ErrorModel e : kErrors) {
      QuantileOracle oracle{m, e};
      for (double xv = 0.0; xv <= 1.0; xv += 0.1) {
        Vector x(1);
        x << xv;
        CHECK(oracle(0.5, x) == doctest::Approx(f0_eval(m, x)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("conditional quantiles are monotone in tau") {
  for (RegressionModel m : kUnivariate) {
    for (ErrorModel e : kErrors) {
      QuantileOracle oracle{m, e};
      for (double xv = 0.0; xv <= 1.0; xv += 0.05) {
        Vector x(1);
        x << xv;
        double prev = oracle(0.05, x);
        for (double tau : {0.25, 0.5, 0.75, 0.95}) {
          const double cur = oracle(tau, x);
          CHECK(cur >= prev - 1e-12);
          prev = cur;
        }
      }
    }
  }
}

TEST_CASE("oracle coverage cross-validates the generators") {
  const Eigen::Index n = 100000;
  std::uint64_t seed = 1000;
  for (RegressionModel m : kUnivariate) {
    for (ErrorModel e : kErrors) {
      Rng rng(seed++);
      Dataset d = sample(m, e, n, rng);
      QuantileOracle oracle{m, e};
      for (double tau : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        Vector q = oracle.evaluate(tau, d.X);
        const double frac =
            static_cast<double>((d.y.array() <= q.array()).count()) /
            static_cast<double>(n);
        const double slack =
            3.0 * std::sqrt(tau * (1.0 - tau) / static_cast<double>(n));
        CHECK(std::abs(frac - tau) <= slack);
      }
    }
  }
}

TEST_CASE("the oracle minimizes empirical check risk against shifts") {
  Rng rng(414);
  Dataset d = sample(RegressionModel::Wave, ErrorModel::ExpHetero, 50000, rng);
  QuantileOracle oracle{RegressionModel::Wave, ErrorModel::ExpHetero};
  for (double tau : {0.25, 0.5, 0.75}) {
    Vector q = oracle.evaluate(tau, d.X);
    const double base = pinball(d.y - q, tau);
    for (double delta : {-0.5, -0.1, 0.1, 0.5}) {
      const double shifted = pinball(d.y - (q.array() + delta).matrix(), tau);
      CHECK(base <= shifted);
    }
  }
}

TEST_CASE("multivariate oracles use the index scales") {
  // Exp-hetero multivariate: scale 0.5*exp(2 xi'x - 1).
  QuantileOracle oracle{RegressionModel::SingleIndex, ErrorModel::ExpHetero};
  Vector x = Vector::Constant(6, 0.5);
  double xi_dot = 0.0;
  for (int j = 0; j < 6; ++j) xi_dot += kHeteroXi[static_cast<std::size_t>(j)] * 0.5;
  const double expect = f0_eval(RegressionModel::SingleIndex, x) +
                        0.5 * std::exp(2.0 * xi_dot - 1.0) * normal_inv_cdf(0.75);
  CHECK(oracle(0.75, x) == doctest::Approx(expect).epsilon(1e-10));
}

}  // TEST_SUITE
