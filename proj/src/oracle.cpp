#include "dqr/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace dqr {

namespace {

void check_tau(double tau, const char* who) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument(std::string(who) + ": tau must be in (0,1)");
}

// Acklam's rational approximation to the inverse normal CDF.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_inv_cdf(double tau) {
  check_tau(tau, "normal_inv_cdf");
  double x = acklam(tau);
  // One Newton step on Phi(x) - tau.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  if (density > 0.0) x -= (normal_cdf(x) - tau) / density;
  return x;
}

double t3_cdf(double x) {
  const double s = std::sqrt(3.0);
  return 0.5 + (x / (s * (1.0 + x * x / 3.0)) + std::atan(x / s)) / M_PI;
}

double t3_inv_cdf(double tau) {
  check_tau(tau, "t3_inv_cdf");
  double lo = -50.0;
  double hi = 50.0;
  double x = normal_inv_cdf(tau);  // close for moderate tau
  const double density_const = 2.0 / (M_PI * std::sqrt(3.0));
  for (int it = 0; it < 200; ++it) {
    const double f = t3_cdf(x) - tau;
    if (std::abs(f) <= 1e-12) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double w = 1.0 + x * x / 3.0;
    const double density = density_const / (w * w);
    double next = x - f / density;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  if (std::abs(t3_cdf(x) - tau) > 1e-10)
    throw std::runtime_error("t3_inv_cdf: did not converge");
  return x;
}

double QuantileOracle::operator()(double tau, const Vector& x) const {
  check_tau(tau, "conditional_quantile");
  const double base = f0_eval(model, x);
  switch (error) {
    case ErrorModel::ScaledT3:
      return base + 0.5 * t3_inv_cdf(tau);
    case ErrorModel::SineHetero:
    case ErrorModel::ExpHetero:
      return base + error_sd(error, model, x) * normal_inv_cdf(tau);
  }
  return base;
}

Vector QuantileOracle::evaluate(double tau, const Matrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out(i) = (*this)(tau, Vector(X.row(i).transpose()));
  return out;
}

double conditional_quantile(const QuantileOracle& oracle, double tau, const Vector& x) {
  return oracle(tau, x);
}

}  // namespace dqr
