#include "impreg/score.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "impreg/error.hpp"

namespace impreg {

namespace {

constexpr double kMaxCondition = 1e12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate_family(const UnivariateFamily& family) {
  std::visit(overloaded{
                 [](const StandardGaussian&) {},
                 [](const StudentT& t) {
                   require(t.dof > 2.0, ErrorCode::InvalidArgument,
                           "StudentT: dof must exceed 2");
                 },
                 [](const GammaFamily& g) {
                   require(g.shape > 0.0 && g.scale > 0.0,
                           ErrorCode::InvalidArgument,
                           "Gamma: shape and scale must be positive");
                 },
                 [](const CustomFamily& c) {
                   require(static_cast<bool>(c.density) &&
                               static_cast<bool>(c.log_density_gradient),
                           ErrorCode::InvalidArgument,
                           "Custom: density and log_density_gradient required");
                 },
             },
             family);
}

}  // namespace

ScoreModel ScoreModel::gaussian(Vector mean, Matrix covariance) {
  const Eigen::Index p = mean.size();
  require(p > 0, ErrorCode::InvalidArgument, "GaussianVector: empty mean");
  require(covariance.rows() == p && covariance.cols() == p,
          ErrorCode::DimensionMismatch, "GaussianVector: covariance shape");
  require(asymmetry(covariance) <= 1e-10, ErrorCode::NotSymmetric,
          "GaussianVector: covariance is not symmetric");

  auto parts = std::make_shared<GaussianParts>();
  parts->mean = std::move(mean);
  parts->covariance = 0.5 * (covariance + covariance.transpose());

  const SymmetricEigen eig = jacobi_eigen(parts->covariance);
  const double lo = eig.values.minCoeff();
  const double hi = eig.values.maxCoeff();
  if (lo <= 0.0)
    fail(ErrorCode::NotPositiveDefinite, "GaussianVector: covariance not SPD");
  if (hi / lo > kMaxCondition)
    fail(ErrorCode::IllConditioned,
         "GaussianVector: covariance condition number exceeds 1e12");

  Eigen::LLT<Matrix> llt(parts->covariance);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotPositiveDefinite, "GaussianVector: Cholesky failed");
  parts->cholesky_lower = llt.matrixL();
  Matrix inv = llt.solve(Matrix::Identity(p, p));
  parts->covariance_inverse = 0.5 * (inv + inv.transpose());
  parts->sqrt = reconstruct(eig.values.cwiseSqrt(), eig.vectors);

  ScoreModel model;
  model.gaussian_ = std::move(parts);
  return model;
}

ScoreModel ScoreModel::iid(UnivariateFamily family) {
  validate_family(family);
  ScoreModel model;
  model.family_ = std::move(family);
  return model;
}

ScoreModel ScoreModel::custom(CustomFamily family, DensityGrid grid) {
  validate_family(family);
  require(grid.points >= 2 && grid.hi > grid.lo, ErrorCode::InvalidArgument,
          "Custom: invalid integration grid");
  // Trapezoid rule over the supplied grid.
  const double step = (grid.hi - grid.lo) / (grid.points - 1);
  double mass = 0.0;
  for (int k = 0; k < grid.points; ++k) {
    const double w = (k == 0 || k == grid.points - 1) ? 0.5 : 1.0;
    mass += w * family.density(grid.lo + k * step);
  }
  mass *= step;
  if (std::abs(mass - 1.0) > 1e-3) {
    std::ostringstream msg;
    msg << "Custom: density integrates to " << mass << " on the grid";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  return iid(std::move(family));
}

bool ScoreModel::is_standard_gaussian() const {
  if (gaussian_) {
    const Eigen::Index p = gaussian_->mean.size();
    return gaussian_->mean.isZero(0.0) &&
           (gaussian_->covariance - Matrix::Identity(p, p)).isZero(0.0);
  }
  return std::holds_alternative<StandardGaussian>(family_);
}

bool ScoreModel::is_centered_gaussian() const {
  if (gaussian_) return gaussian_->mean.isZero(0.0);
  return std::holds_alternative<StandardGaussian>(family_);
}

std::optional<Eigen::Index> ScoreModel::dimension() const {
  if (gaussian_) return gaussian_->mean.size();
  return std::nullopt;
}

const UnivariateFamily& ScoreModel::family() const {
  require(!gaussian_, ErrorCode::Unsupported,
          "GaussianVector model has no univariate family");
  return family_;
}

const Vector& ScoreModel::mean() const {
  require(gaussian_ != nullptr, ErrorCode::Unsupported, "not a GaussianVector model");
  return gaussian_->mean;
}
const Matrix& ScoreModel::covariance() const {
  require(gaussian_ != nullptr, ErrorCode::Unsupported, "not a GaussianVector model");
  return gaussian_->covariance;
}
const Matrix& ScoreModel::covariance_inverse() const {
  require(gaussian_ != nullptr, ErrorCode::Unsupported, "not a GaussianVector model");
  return gaussian_->covariance_inverse;
}
const Matrix& ScoreModel::covariance_sqrt() const {
  require(gaussian_ != nullptr, ErrorCode::Unsupported, "not a GaussianVector model");
  return gaussian_->sqrt;
}

bool ScoreModel::in_support(double x) const {
  if (!std::isfinite(x)) return false;
  if (gaussian_) return true;
  return std::visit(overloaded{
                        [](const StandardGaussian&) { return true; },
                        [](const StudentT&) { return true; },
                        [&](const GammaFamily&) { return x > 0.0; },
                        [&](const CustomFamily& c) { return c.density(x) > 0.0; },
                    },
                    family_);
}

double ScoreModel::score_scalar(double x) const {
  require(!gaussian_, ErrorCode::Unsupported,
          "scalar score is defined for i.i.d. models only");
  if (!in_support(x)) {
    std::ostringstream msg;
    msg << "covariate " << x << " outside support of " << name();
    fail(ErrorCode::OutsideSupport, msg.str());
  }
  return std::visit(
      overloaded{
          [&](const StandardGaussian&) { return x; },
          // -(d/dx) log (1 + x^2/nu)^{-(nu+1)/2}
          [&](const StudentT& t) { return (t.dof + 1.0) * x / (t.dof + x * x); },
          // -(d/dx) [(k-1) log x - x/theta]
          [&](const GammaFamily& g) { return 1.0 / g.scale - (g.shape - 1.0) / x; },
          [&](const CustomFamily& c) { return -c.log_density_gradient(x); },
      },
      family_);
}

std::string ScoreModel::name() const {
  std::ostringstream out;
  if (gaussian_) {
    out << "GaussianVector(p=" << gaussian_->mean.size() << ")";
    return out.str();
  }
  std::visit(overloaded{
                 [&](const StandardGaussian&) { out << "StandardGaussian"; },
                 [&](const StudentT& t) { out << "StudentT(" << t.dof << ")"; },
                 [&](const GammaFamily& g) {
                   out << "Gamma(" << g.shape << "," << g.scale << ")";
                 },
                 [&](const CustomFamily&) { out << "Custom"; },
             },
             family_);
  return out.str();
}

Vector score_vector(const ScoreModel& model, const Vector& x) {
  if (model.is_gaussian_vector()) {
    require(x.size() == model.mean().size(), ErrorCode::DimensionMismatch,
            "score_vector: dimension mismatch");
    return model.covariance_inverse() * (x - model.mean());
  }
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out(j) = model.score_scalar(x(j));
  return out;
}

Matrix score_matrix(const ScoreModel& model, const Matrix& x) {
  require(model.is_iid(), ErrorCode::Unsupported,
          "score_matrix: matrix score is entrywise; GaussianVector not allowed");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = model.score_scalar(x(i, j));
  return out;
}

namespace {

struct Sampler {
  const UnivariateFamily& family;

  template <class Fill>
  void run(Rng& rng, Fill&& fill) const {
    std::visit(overloaded{
                   [&](const StandardGaussian&) {
                     std::normal_distribution<double> dist(0.0, 1.0);
                     fill([&] { return dist(rng); });
                   },
                   [&](const StudentT& t) {
                     std::student_t_distribution<double> dist(t.dof);
                     fill([&] { return dist(rng); });
                   },
                   [&](const GammaFamily& g) {
                     std::gamma_distribution<double> dist(g.shape, g.scale);
                     fill([&] { return dist(rng); });
                   },
                   [&](const CustomFamily& c) {
                     require(static_cast<bool>(c.sampler), ErrorCode::Unsupported,
                             "Custom family has no sampler");
                     fill([&] { return c.sampler(rng); });
                   },
               },
               family);
  }
};

}  // namespace

Matrix sample_covariates(const ScoreModel& model, Eigen::Index n, Eigen::Index p,
                         Rng& rng) {
  Matrix x(n, p);
  if (model.is_gaussian_vector()) {
    require(p == model.mean().size(), ErrorCode::DimensionMismatch,
            "sample_covariates: dimension mismatch");
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix z(p, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) z(j, i) = dist(rng);
    const auto& g = *model.gaussian_;
    x = ((g.cholesky_lower * z).colwise() + g.mean).transpose();
    return x;
  }
  // Row-major fill so that row i depends only on draws for rows <= i.
  Sampler{model.family()}.run(rng, [&](auto draw) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = draw();
  });
  return x;
}

Matrix sample_matrix_covariate(const ScoreModel& model, Eigen::Index d, Rng& rng) {
  require(model.is_iid(), ErrorCode::Unsupported,
          "matrix covariates require an i.i.d. model");
  Matrix x(d, d);
  Sampler{model.family()}.run(rng, [&](auto draw) {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = draw();
  });
  return x;
}

}  // namespace impreg
