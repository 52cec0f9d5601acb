#include "impreg/robust.hpp"

#include <cmath>

#include "impreg/error.hpp"

namespace impreg {

const char* to_string(MomentMode mode) noexcept {
  switch (mode) {
    case MomentMode::PlainVector: return "PlainVector";
    case MomentMode::TruncatedVector: return "TruncatedVector";
    case MomentMode::PlainMatrixSymmetrized: return "PlainMatrixSymmetrized";
    case MomentMode::ShrunkMatrixSymmetrized: return "ShrunkMatrixSymmetrized";
  }
  return "?";
}

double winsorize(double a, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "winsorize: tau must be positive");
  if (std::abs(a) <= tau) return a;
  return a > 0.0 ? tau : -tau;
}

double psi(double x) {
  if (x > 0.0) return std::log1p(x + 0.5 * x * x);
  return -std::log1p(-x + 0.5 * x * x);
}

Matrix spectral_shrink(const Matrix& a, double kappa) {
  require(kappa > 0.0, ErrorCode::InvalidArgument,
          "spectral_shrink: kappa must be positive");
  require(a.allFinite(), ErrorCode::InvalidArgument,
          "spectral_shrink: non-finite entry");
  if (a.size() == 0) return a;
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector shrunk = svd.singularValues().unaryExpr(
      [kappa](double s) { return psi(kappa * s) / kappa; });
  return svd.matrixU().leftCols(shrunk.size()) * shrunk.asDiagonal() *
         svd.matrixV().leftCols(shrunk.size()).transpose();
}

MomentEstimate plain_moment(const SimInstance& inst, const ScoreModel& model) {
  require(inst.n() > 0, ErrorCode::EmptyInstance, "plain_moment: empty instance");
  const double n = static_cast<double>(inst.n());
  Vector phi;
  if (model.is_gaussian_vector()) {
    // (1/n) sum y_i Sigma^{-1}(x_i - mu)
    const Vector weighted = inst.covariates.transpose() * inst.responses / n;
    phi = model.covariance_inverse() *
          (weighted - model.mean() * (inst.responses.sum() / n));
  } else if (model.is_standard_gaussian()) {
    phi = inst.covariates.transpose() * inst.responses / n;
  } else {
    phi = Vector::Zero(inst.p());
    for (Eigen::Index i = 0; i < inst.n(); ++i)
      phi += inst.responses(i) * score_vector(model, inst.covariates.row(i).transpose());
    phi /= n;
  }
  return {phi, MomentMode::PlainVector, std::nullopt, std::nullopt};
}

MomentEstimate plain_moment(const MatrixSimInstance& inst, const ScoreModel& model) {
  require(inst.n() > 0, ErrorCode::EmptyInstance, "plain_moment: empty instance");
  const Eigen::Index d = inst.d();
  Matrix acc = Matrix::Zero(d, d);
  const bool gaussian = model.is_standard_gaussian();
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    const Matrix& x = inst.covariates[static_cast<size_t>(i)];
    if (gaussian)
      acc += inst.responses(i) * x;
    else
      acc += inst.responses(i) * score_matrix(model, x);
  }
  const double n = static_cast<double>(inst.n());
  Matrix value = (acc + acc.transpose()) / (2.0 * n);
  return {value, MomentMode::PlainMatrixSymmetrized, std::nullopt, std::nullopt};
}

MomentEstimate truncated_moment_vector(const SimInstance& inst,
                                       const ScoreModel& model, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument,
          "truncated_moment_vector: tau must be positive");
  require(inst.n() > 0, ErrorCode::EmptyInstance,
          "truncated_moment_vector: empty instance");
  Vector phi = Vector::Zero(inst.p());
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    const double y = winsorize(inst.responses(i), tau);
    const Vector s = score_vector(model, inst.covariates.row(i).transpose());
    for (Eigen::Index j = 0; j < s.size(); ++j) phi(j) += y * winsorize(s(j), tau);
  }
  phi /= static_cast<double>(inst.n());
  return {phi, MomentMode::TruncatedVector, tau, std::nullopt};
}

MomentEstimate robust_moment_matrix(const MatrixSimInstance& inst,
                                    const ScoreModel& model, double kappa) {
  require(kappa > 0.0, ErrorCode::InvalidArgument,
          "robust_moment_matrix: kappa must be positive");
  require(inst.n() > 0, ErrorCode::EmptyInstance,
          "robust_moment_matrix: empty instance");
  const Eigen::Index d = inst.d();
  Matrix acc = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    const Matrix& x = inst.covariates[static_cast<size_t>(i)];
    const Matrix s = model.is_standard_gaussian() ? x : score_matrix(model, x);
    acc += spectral_shrink(inst.responses(i) * s, kappa);
  }
  const double n = static_cast<double>(inst.n());
  Matrix value = (acc + acc.transpose()) / (2.0 * n);
  return {value, MomentMode::ShrunkMatrixSymmetrized, std::nullopt, kappa};
}

double truncation_level(double fourth_moment, double n, double p) {
  require(fourth_moment > 0.0 && n > 0.0 && p > 1.0, ErrorCode::InvalidArgument,
          "truncation_level: need M > 0, n > 0, p > 1");
  return std::pow(fourth_moment * n / std::log(p), 0.25) / 2.0;
}

double simulation_truncation_level(double n, double p) {
  require(n > 0.0 && p > 1.0, ErrorCode::InvalidArgument,
          "simulation_truncation_level: need n > 0, p > 1");
  return 2.0 * std::pow(n / std::log(p), 0.25);
}

double shrinkage_level(double fourth_moment, double n, double d) {
  require(fourth_moment > 0.0 && n > 0.0 && d > 0.0, ErrorCode::InvalidArgument,
          "shrinkage_level: need M, n, d > 0");
  return std::sqrt(std::log(4.0 * d) / (n * d * fourth_moment));
}

double simulation_shrinkage_level(double n, double d) {
  require(n > 0.0 && d > 0.0, ErrorCode::InvalidArgument,
          "simulation_shrinkage_level: need n, d > 0");
  return 2.0 * std::sqrt(std::log(4.0 * d) / (n * d));
}

double empirical_fourth_moment(const Vector& responses) {
  require(responses.size() > 0, ErrorCode::EmptyInstance,
          "empirical_fourth_moment: no responses");
  return responses.array().pow(4).mean();
}

}  // namespace impreg
