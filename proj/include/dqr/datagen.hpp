#ifndef DQR_DATAGEN_HPP
#define DQR_DATAGEN_HPP

#include <array>
#include <string>

#include "dqr/net.hpp"
#include "dqr/rng.hpp"

namespace dqr {

enum class RegressionModel { Linear1D, Wave, Triangle, SingleIndex, Additive };
enum class ErrorModel { ScaledT3, SineHetero, ExpHetero };

/// Index coefficients used by the multivariate benchmarks.
inline constexpr std::array<double, 6> kSingleIndexTheta = {
    2.2831, -1.4818, 5.1966, 0.0, 0.0, 0.0515};
inline constexpr std::array<double, 6> kHeteroXi = {
    1.8100, -1.2999, 0.0, 0.0, -2.7874, 0.3197};

int model_dim(RegressionModel model);
bool model_is_univariate(RegressionModel model);

std::string model_name(RegressionModel model);
RegressionModel model_from_name(const std::string& name);
std::string error_name(ErrorModel error);
ErrorModel error_from_name(const std::string& name);

/// Target regression function f0 evaluated at one covariate vector.
double f0_eval(RegressionModel model, const Vector& x);

/// f0 over the rows of X.
Vector f0_eval(RegressionModel model, const Matrix& X);

/// Conditional standard deviation of the Gaussian heteroscedastic errors
/// (0.5 |sin(pi z)| or 0.5 exp(2z - 1) with z = x or xi'x). Throws for
/// the t(3) error, which has no x-dependent scale.
double error_sd(ErrorModel error, RegressionModel model, const Vector& x);

struct Dataset {
  Matrix X;
  Vector y;

  Eigen::Index size() const { return X.rows(); }
};

/// n draws of X ~ uniform([0,1]^d) and y = f0(X) + eta per the error model.
Dataset sample(RegressionModel model, ErrorModel error, Eigen::Index n, Rng& rng);

/// CSV with header x1..xd,y.
void write_csv(const Dataset& data, const std::string& path);

}  // namespace dqr

#endif  // DQR_DATAGEN_HPP
