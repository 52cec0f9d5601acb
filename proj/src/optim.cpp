#include "impreg/optim.hpp"

#include <cmath>
#include <string>

#include "impreg/error.hpp"

namespace impreg {

namespace {

constexpr double kDivergenceBound = 1e12;

bool blown_up(const Matrix& a) {
  return !a.allFinite() || (a.size() > 0 && a.cwiseAbs().maxCoeff() > kDivergenceBound);
}

bool should_record(std::int64_t t, const SolverConfig& cfg) {
  return t % cfg.record_stride == 0 || t == cfg.t_max;
}

}  // namespace

void SolverConfig::validate() const {
  require(alpha > 0.0, ErrorCode::Config, "solver: alpha must be positive");
  require(eta > 0.0, ErrorCode::Config, "solver: eta must be positive");
  require(t_max >= 0, ErrorCode::Config, "solver: t_max must be nonnegative");
  require(record_stride >= 1, ErrorCode::Config, "solver: record_stride must be >= 1");
}

const TrajectoryRecord& Trajectory::at_step(std::int64_t t) const {
  for (const auto& rec : records)
    if (rec.t == t) return rec;
  fail(ErrorCode::InvalidArgument, "trajectory has no record at t=" + std::to_string(t));
}

VectorLossGrad vector_loss_grad(const Vector& w, const Vector& v, const Vector& phi) {
  require(w.size() == v.size() && w.size() == phi.size(), ErrorCode::DimensionMismatch,
          "vector_loss_grad: dimension mismatch");
  const Vector beta = w.cwiseProduct(w) - v.cwiseProduct(v);
  const Vector resid = beta - phi;
  return {beta.dot(beta) - 2.0 * beta.dot(phi), 4.0 * resid.cwiseProduct(w),
          -4.0 * resid.cwiseProduct(v)};
}

MatrixLossGrad matrix_loss_grad(const Matrix& w, const Matrix& v, const Matrix& m) {
  require(w.rows() == w.cols() && v.rows() == v.cols() && w.rows() == v.rows() &&
              m.rows() == w.rows() && m.cols() == w.cols(),
          ErrorCode::DimensionMismatch, "matrix_loss_grad: dimension mismatch");
  const Matrix beta = w * w.transpose() - v * v.transpose();
  const Matrix resid = beta - m;
  // dL = 2 <beta - M, dW W^T + W dW^T> = <4 (beta - M) W, dW> for symmetric M.
  return {beta.cwiseProduct(beta).sum() - 2.0 * beta.cwiseProduct(m).sum(),
          4.0 * resid * w, -4.0 * resid * v};
}

double max_safe_stepsize(const Vector& phi, const Vector& beta) {
  const double scale = phi.cwiseAbs().maxCoeff() + beta.cwiseAbs().maxCoeff();
  return scale > 0.0 ? 1.0 / (2.0 * scale) : INFINITY;
}

VectorState vector_step(const VectorState& state, const Vector& phi, double eta) {
  require(eta > 0.0, ErrorCode::InvalidArgument, "vector_step: eta must be positive");
  require(state.w.size() == phi.size() && state.v.size() == phi.size(),
          ErrorCode::DimensionMismatch, "vector_step: dimension mismatch");
  const Vector resid = state.beta() - phi;
  VectorState next{state.w - eta * resid.cwiseProduct(state.w),
                   state.v + eta * resid.cwiseProduct(state.v), state.t + 1};
  if (blown_up(next.w) || blown_up(next.v))
    fail(ErrorCode::Divergence, "vector_step: iterate diverged at t=" + std::to_string(next.t));
  return next;
}

MatrixState matrix_step(const MatrixState& state, const Matrix& m, double eta) {
  require(eta > 0.0, ErrorCode::InvalidArgument, "matrix_step: eta must be positive");
  require(state.w.rows() == m.rows() && state.v.rows() == m.rows() && m.rows() == m.cols(),
          ErrorCode::DimensionMismatch, "matrix_step: dimension mismatch");
  require(asymmetry(m) <= 1e-10, ErrorCode::NotSymmetric,
          "matrix_step: moment must be symmetric");
  const Matrix resid = state.beta() - m;
  MatrixState next{state.w - eta * resid * state.w, state.v + eta * resid * state.v,
                   state.t + 1};
  if (blown_up(next.w) || blown_up(next.v))
    fail(ErrorCode::Divergence, "matrix_step: iterate diverged at t=" + std::to_string(next.t));
  return next;
}

Trajectory run_vector(const MomentEstimate& moment, const SolverConfig& config,
                      const std::optional<RunTruth>& truth) {
  config.validate();
  require(moment.is_vector(), ErrorCode::InvalidArgument,
          "run_vector: moment estimate is not a vector");
  const Vector phi = moment.vector();
  const Eigen::Index p = phi.size();

  std::vector<char> off_support;
  Vector target;
  if (truth) {
    require(truth->beta_star.size() == p, ErrorCode::DimensionMismatch,
            "run_vector: truth dimension mismatch");
    off_support.assign(static_cast<size_t>(p), 1);
    for (Eigen::Index j : truth->support) off_support[static_cast<size_t>(j)] = 0;
    if (truth->mu_star) target = *truth->mu_star * truth->beta_star.col(0);
  }

  Trajectory traj;
  traj.kind = TrajectoryKind::Vector;
  traj.config = config;
  traj.records.reserve(static_cast<size_t>(config.t_max / config.record_stride + 2));

  auto record = [&](std::int64_t t, const Vector& beta) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.beta = beta;
    rec.loss = beta.dot(beta) - 2.0 * beta.dot(phi);
    if (truth) {
      if (target.size() == p) rec.dist_sq = (beta - target).squaredNorm();
      double off = 0.0;
      for (Eigen::Index j = 0; j < p; ++j)
        if (off_support[static_cast<size_t>(j)]) off = std::max(off, std::abs(beta(j)));
      rec.max_off_support = off;
    }
    traj.records.push_back(std::move(rec));
  };

  // Hot loop works in place; vector_step is the reference for one update.
  Vector w = Vector::Constant(p, config.alpha);
  Vector v = Vector::Constant(p, config.alpha);
  Vector beta = Vector::Zero(p);
  record(0, beta);
  const double eta = config.eta;
  for (std::int64_t t = 1; t <= config.t_max; ++t) {
    double peak = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double r = eta * (beta(j) - phi(j));
      const double wj = w(j) - r * w(j);
      const double vj = v(j) + r * v(j);
      w(j) = wj;
      v(j) = vj;
      beta(j) = wj * wj - vj * vj;
      peak = std::max(peak, std::max(std::abs(wj), std::abs(vj)));
    }
    if (!(peak <= kDivergenceBound)) {
      traj.diverged = true;
      traj.diverged_at = t;
      break;
    }
    if (should_record(t, config)) record(t, beta);
  }
  traj.final_w = w;
  traj.final_v = v;
  return traj;
}

Trajectory run_matrix(const MomentEstimate& moment, const SolverConfig& config,
                      const std::optional<RunTruth>& truth) {
  config.validate();
  require(!moment.is_vector(), ErrorCode::InvalidArgument,
          "run_matrix: moment estimate is not a matrix");
  const Matrix& m = moment.value;
  require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "run_matrix: moment not square");
  require(asymmetry(m) <= 1e-10, ErrorCode::NotSymmetric,
          "run_matrix: moment must be symmetric");
  const Eigen::Index d = m.rows();

  Matrix target;
  if (truth) {
    require(truth->beta_star.rows() == d && truth->beta_star.cols() == d,
            ErrorCode::DimensionMismatch, "run_matrix: truth dimension mismatch");
    if (truth->mu_star) target = *truth->mu_star * truth->beta_star;
  }

  Trajectory traj;
  traj.kind = TrajectoryKind::Matrix;
  traj.config = config;
  traj.records.reserve(static_cast<size_t>(config.t_max / config.record_stride + 2));

  auto record = [&](std::int64_t t, const Matrix& beta) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.beta = beta;
    rec.loss = beta.cwiseProduct(beta).sum() - 2.0 * beta.cwiseProduct(m).sum();
    if (target.size() > 0) rec.dist_sq = (beta - target).squaredNorm();
    traj.records.push_back(std::move(rec));
  };

  MatrixState state{config.alpha * Matrix::Identity(d, d),
                    config.alpha * Matrix::Identity(d, d), 0};
  record(0, state.beta());
  Matrix resid(d, d), w_next(d, d), v_next(d, d), beta(d, d);
  beta.setZero();
  for (std::int64_t t = 1; t <= config.t_max; ++t) {
    resid = beta - m;
    w_next.noalias() = state.w;
    w_next.noalias() -= config.eta * resid * state.w;
    v_next.noalias() = state.v;
    v_next.noalias() += config.eta * resid * state.v;
    state.w.swap(w_next);
    state.v.swap(v_next);
    state.t = t;
    if (blown_up(state.w) || blown_up(state.v)) {
      traj.diverged = true;
      traj.diverged_at = t;
      break;
    }
    beta.noalias() = state.w * state.w.transpose();
    beta.noalias() -= state.v * state.v.transpose();
    if (should_record(t, config)) record(t, beta);
  }
  traj.final_w = state.w;
  traj.final_v = state.v;
  return traj;
}

Vector threshold_vector(const Vector& beta, double lambda) {
  require(lambda >= 0.0, ErrorCode::InvalidArgument,
          "threshold_vector: lambda must be nonnegative");
  return beta.unaryExpr([lambda](double b) { return std::abs(b) < lambda ? 0.0 : b; });
}

Matrix threshold_matrix(const Matrix& beta, double lambda) {
  require(lambda >= 0.0, ErrorCode::InvalidArgument,
          "threshold_matrix: lambda must be nonnegative");
  require(asymmetry(beta) <= 1e-10, ErrorCode::NotSymmetric,
          "threshold_matrix: matrix must be symmetric");
  SymmetricEigen eig = jacobi_eigen(beta);
  for (Eigen::Index k = 0; k < eig.values.size(); ++k)
    if (std::abs(eig.values(k)) < lambda) eig.values(k) = 0.0;
  return reconstruct(eig.values, eig.vectors);
}

int numerical_rank(const Matrix& beta, double lambda) {
  const SymmetricEigen eig = jacobi_eigen(beta);
  return static_cast<int>((eig.values.array().abs() >= lambda).count());
}

Matrix normalize(const Matrix& beta, NormKind kind, const Matrix* sigma) {
  double norm = 0.0;
  switch (kind) {
    case NormKind::SigmaHalf: {
      require(sigma != nullptr, ErrorCode::InvalidArgument,
              "normalize: SigmaHalf needs a covariance");
      require(beta.cols() == 1 && sigma->rows() == beta.rows(),
              ErrorCode::DimensionMismatch, "normalize: dimension mismatch");
      // ||Sigma^{1/2} b||_2^2 = b^T Sigma b
      norm = std::sqrt(std::max(0.0, (beta.transpose() * (*sigma) * beta)(0, 0)));
      break;
    }
    case NormKind::L2:
    case NormKind::Frobenius:
      norm = beta.norm();
      break;
  }
  require(norm > 1e-14, ErrorCode::ZeroNorm, "normalize: norm is zero");
  return beta / norm;
}

}  // namespace impreg
