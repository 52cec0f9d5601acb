#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "impreg/linalg.hpp"
#include "impreg/rng.hpp"

namespace impreg {

struct StandardGaussian {};

struct StudentT {
  double dof;
};

/// Gamma(shape k, scale theta).
struct GammaFamily {
  double shape;
  double scale;
};

/// User-supplied univariate density. `log_density_gradient` is d/dx log p0;
/// `sampler` is optional and only needed for data generation.
struct CustomFamily {
  std::function<double(double)> density;
  std::function<double(double)> log_density_gradient;
  std::function<double(Rng&)> sampler;
};

using UnivariateFamily =
    std::variant<StandardGaussian, StudentT, GammaFamily, CustomFamily>;

/// Compact grid used to check that a custom density is normalized.
struct DensityGrid {
  double lo;
  double hi;
  int points;
};

/// Covariate distribution with a known score transform S(x) = -grad log p0(x).
///
/// Either a multivariate Gaussian N(mean, covariance), or i.i.d. entries drawn
/// from a univariate family (any dimension). Immutable after construction.
class ScoreModel {
 public:
  static ScoreModel gaussian(Vector mean, Matrix covariance);
  static ScoreModel iid(UnivariateFamily family);
  static ScoreModel standard_gaussian() { return iid(StandardGaussian{}); }
  static ScoreModel student_t(double dof) { return iid(StudentT{dof}); }
  static ScoreModel gamma(double shape, double scale) {
    return iid(GammaFamily{shape, scale});
  }
  static ScoreModel custom(CustomFamily family, DensityGrid grid);

  bool is_gaussian_vector() const noexcept { return gaussian_ != nullptr; }
  bool is_iid() const noexcept { return gaussian_ == nullptr; }

  /// True when covariates are centered Gaussian with identity covariance
  /// (standard Gaussian i.i.d. entries, or GaussianVector(0, I)).
  bool is_standard_gaussian() const;
  /// Gaussian with zero mean (any covariance).
  bool is_centered_gaussian() const;

  /// Fixed dimension for GaussianVector models; nullopt for i.i.d. models.
  std::optional<Eigen::Index> dimension() const;

  const UnivariateFamily& family() const;
  const Vector& mean() const;
  const Matrix& covariance() const;
  const Matrix& covariance_inverse() const;
  const Matrix& covariance_sqrt() const;

  /// Univariate score for i.i.d. models; throws OutsideSupport.
  double score_scalar(double x) const;
  bool in_support(double x) const;

  /// Short identifier, e.g. "StandardGaussian", "StudentT(5)".
  std::string name() const;

 private:
  struct GaussianParts {
    Vector mean;
    Matrix covariance;
    Matrix covariance_inverse;
    Matrix cholesky_lower;
    Matrix sqrt;
  };

  std::shared_ptr<const GaussianParts> gaussian_;
  UnivariateFamily family_ = StandardGaussian{};

  friend Matrix sample_covariates(const ScoreModel&, Eigen::Index, Eigen::Index,
                                  Rng&);
};

Vector score_vector(const ScoreModel& model, const Vector& x);
Matrix score_matrix(const ScoreModel& model, const Matrix& x);

/// Draws an n x p covariate matrix (rows are observations).
Matrix sample_covariates(const ScoreModel& model, Eigen::Index n, Eigen::Index p,
                         Rng& rng);

/// Draws one d x d matrix with i.i.d. entries (i.i.d. models only).
Matrix sample_matrix_covariate(const ScoreModel& model, Eigen::Index d, Rng& rng);

}  // namespace impreg
