#include "dqr/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dqr {

namespace {

double dot_xi(const Vector& x) {
  double s = 0.0;
  for (int k = 0; k < 6; ++k) s += kHeteroXi[static_cast<std::size_t>(k)] * x(k);
  return s;
}

void check_dim(RegressionModel model, const Vector& x) {
  if (x.size() != model_dim(model)) {
    throw std::invalid_argument("datagen: " + model_name(model) + " expects dimension " +
                                std::to_string(model_dim(model)) + ", got " +
                                std::to_string(x.size()));
  }
}

}  // namespace

int model_dim(RegressionModel model) {
  switch (model) {
    case RegressionModel::Linear1D:
    case RegressionModel::Wave:
    case RegressionModel::Triangle:
      return 1;
    case RegressionModel::SingleIndex:
    case RegressionModel::Additive:
      return 6;
  }
  return 1;
}

bool model_is_univariate(RegressionModel model) { return model_dim(model) == 1; }

std::string model_name(RegressionModel model) {
  switch (model) {
    case RegressionModel::Linear1D: return "linear";
    case RegressionModel::Wave: return "wave";
    case RegressionModel::Triangle: return "triangle";
    case RegressionModel::SingleIndex: return "single_index";
    case RegressionModel::Additive: return "additive";
  }
  return "linear";
}

RegressionModel model_from_name(const std::string& name) {
  if (name == "linear") return RegressionModel::Linear1D;
  if (name == "wave") return RegressionModel::Wave;
  if (name == "triangle") return RegressionModel::Triangle;
  if (name == "single_index") return RegressionModel::SingleIndex;
  if (name == "additive") return RegressionModel::Additive;
  throw std::invalid_argument("unknown regression model '" + name + "'");
}

std::string error_name(ErrorModel error) {
  switch (error) {
    case ErrorModel::ScaledT3: return "t3";
    case ErrorModel::SineHetero: return "sine";
    case ErrorModel::ExpHetero: return "exp";
  }
  return "t3";
}

ErrorModel error_from_name(const std::string& name) {
  if (name == "t3") return ErrorModel::ScaledT3;
  if (name == "sine") return ErrorModel::SineHetero;
  if (name == "exp") return ErrorModel::ExpHetero;
  throw std::invalid_argument("unknown error model '" + name + "'");
}

double f0_eval(RegressionModel model, const Vector& x) {
  check_dim(model, x);
  switch (model) {
    case RegressionModel::Linear1D:
      return 2.0 * x(0);
    case RegressionModel::Wave:
      return 2.0 * x(0) * std::sin(4.0 * M_PI * x(0));
    case RegressionModel::Triangle:
      return 4.0 * (1.0 - std::abs(x(0) - 0.5));
    case RegressionModel::SingleIndex: {
      double s = 0.0;
      for (int k = 0; k < 6; ++k)
        s += kSingleIndexTheta[static_cast<std::size_t>(k)] * x(k);
      return std::exp(s);
    }
    case RegressionModel::Additive:
      return std::exp(4.0 * (x(0) - 0.5)) + 9.0 * (x(1) - 0.5) * (x(1) - 0.5) +
             10.0 * std::sin(2.0 * M_PI * x(2)) - 7.0 * std::abs(x(3) - 0.5);
  }
  return 0.0;
}

Vector f0_eval(RegressionModel model, const Matrix& X) {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out(i) = f0_eval(model, Vector(X.row(i).transpose()));
  return out;
}

double error_sd(ErrorModel error, RegressionModel model, const Vector& x) {
  check_dim(model, x);
  const double z = model_is_univariate(model) ? x(0) : dot_xi(x);
  switch (error) {
    case ErrorModel::SineHetero:
      return 0.5 * std::abs(std::sin(M_PI * z));
    case ErrorModel::ExpHetero:
      return 0.5 * std::exp(2.0 * z - 1.0);
    case ErrorModel::ScaledT3:
      break;
  }
  throw std::invalid_argument("error_sd: t(3) error has no covariate-dependent scale");
}

Dataset sample(RegressionModel model, ErrorModel error, Eigen::Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const int d = model_dim(model);
  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.X(i, j) = rng.uniform01();
    const Vector x = data.X.row(i).transpose();
    double eta = 0.0;
    if (error == ErrorModel::ScaledT3) {
      eta = 0.5 * rng.student_t3();
    } else {
      eta = error_sd(error, model, x) * rng.normal();
    }
    data.y(i) = f0_eval(model, x) + eta;
  }
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (Eigen::Index j = 0; j < data.X.cols(); ++j)
    out << 'x' << (j + 1) << ',';
  out << "y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,", data.X(i, j));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g\n", data.y(i));
    out << buf;
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

}  // namespace dqr
