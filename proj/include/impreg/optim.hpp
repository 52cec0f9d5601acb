#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "impreg/linalg.hpp"
#include "impreg/robust.hpp"

namespace impreg {

/// Over-parameterized vector iterate: beta = w.*w - v.*v.
struct VectorState {
  Vector w;
  Vector v;
  std::int64_t t = 0;

  Vector beta() const { return w.cwiseProduct(w) - v.cwiseProduct(v); }
};

/// Over-parameterized matrix iterate: beta = W W^T - V V^T.
struct MatrixState {
  Matrix w;
  Matrix v;
  std::int64_t t = 0;

  Matrix beta() const { return w * w.transpose() - v * v.transpose(); }
};

struct SolverConfig {
  double alpha = 1e-5;  // initialization magnitude
  double eta = 0.005;   // stepsize
  std::int64_t t_max = 10000;
  std::int64_t record_stride = 10;

  static SolverConfig vector_defaults() { return {}; }
  static SolverConfig matrix_defaults() { return {1e-3, 0.005, 5000, 10}; }
  void validate() const;
};

/// Hidden truth used to annotate trajectory records.
struct RunTruth {
  Matrix beta_star;  // p x 1 for vectors
  std::optional<double> mu_star;
  std::vector<Eigen::Index> support;  // vector runs only
};

struct TrajectoryRecord {
  std::int64_t t = 0;
  Matrix beta;  // p x 1 for vector runs
  double loss = 0.0;
  std::optional<double> dist_sq;          // ||beta_t - mu* beta*||^2
  std::optional<double> max_off_support;  // max_{j not in S} |beta_tj|
};

enum class TrajectoryKind { Vector, Matrix };

struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::Vector;
  SolverConfig config;
  std::vector<TrajectoryRecord> records;
  bool diverged = false;
  std::int64_t diverged_at = -1;
  /// Factors at the last completed step.
  Matrix final_w;
  Matrix final_v;

  const TrajectoryRecord& at_step(std::int64_t t) const;
};

struct VectorLossGrad {
  double loss;
  Vector grad_w;
  Vector grad_v;
};

struct MatrixLossGrad {
  double loss;
  Matrix grad_w;
  Matrix grad_v;
};

/// L(w, v) = <beta, beta> - 2 <beta, phi> with its exact gradients.
VectorLossGrad vector_loss_grad(const Vector& w, const Vector& v, const Vector& phi);

/// L(W, V) = <beta, beta> - 2 <beta, M> for symmetric M.
MatrixLossGrad matrix_loss_grad(const Matrix& w, const Matrix& v, const Matrix& m);

/// Largest stepsize for which every factor entry keeps its sign:
/// 1 / (2 (||phi||_inf + max_j |beta_j|)).
double max_safe_stepsize(const Vector& phi, const Vector& beta);

/// w' = w - eta (beta - phi) .* w,  v' = v + eta (beta - phi) .* v.
/// Equivalent to plain gradient descent on vector_loss_grad with stepsize
/// eta / 4. Throws Divergence on non-finite or |entry| > 1e12.
VectorState vector_step(const VectorState& state, const Vector& phi, double eta);

/// W' = W - eta (beta - M) W,  V' = V + eta (beta - M) V.
MatrixState matrix_step(const MatrixState& state, const Matrix& m, double eta);

Trajectory run_vector(const MomentEstimate& phi, const SolverConfig& config,
                      const std::optional<RunTruth>& truth = std::nullopt);
Trajectory run_matrix(const MomentEstimate& m, const SolverConfig& config,
                      const std::optional<RunTruth>& truth = std::nullopt);

Vector threshold_vector(const Vector& beta, double lambda);
Matrix threshold_matrix(const Matrix& beta, double lambda);

/// Number of eigenvalues with magnitude >= lambda.
int numerical_rank(const Matrix& beta, double lambda);

enum class NormKind { SigmaHalf, L2, Frobenius };

/// Divides by ||Sigma^{1/2} beta||_2, ||beta||_2 or ||beta||_F.
Matrix normalize(const Matrix& beta, NormKind kind, const Matrix* sigma = nullptr);

}  // namespace impreg
