#ifndef DQR_ORACLE_HPP
#define DQR_ORACLE_HPP

#include "dqr/datagen.hpp"

namespace dqr {

/// Inverse standard-normal CDF; rational approximation refined by one
/// Newton step on the erf-based CDF. Absolute error below 1e-9.
double normal_inv_cdf(double tau);

/// Standard normal CDF (erfc based), used for refinement and testing.
double normal_cdf(double x);

/// CDF of Student t with 3 degrees of freedom (closed form).
double t3_cdf(double x);

/// Inverse t(3) CDF via Newton iteration with bisection fallback on
/// [-50, 50]; |t3_cdf(result) - tau| <= 1e-10.
double t3_inv_cdf(double tau);

/// Analytic conditional quantile f0^tau for one (model, error) pair.
struct QuantileOracle {
  RegressionModel model;
  ErrorModel error;

  double operator()(double tau, const Vector& x) const;
  Vector evaluate(double tau, const Matrix& X) const;
};

double conditional_quantile(const QuantileOracle& oracle, double tau, const Vector& x);

}  // namespace dqr

#endif  // DQR_ORACLE_HPP
