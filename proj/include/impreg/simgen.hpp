#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "impreg/link.hpp"
#include "impreg/linalg.hpp"
#include "impreg/rng.hpp"
#include "impreg/score.hpp"

namespace impreg {

/// Vector single index model sample with its hidden truth.
struct SimInstance {
  Matrix covariates;  // n x p, one observation per row
  Vector responses;   // n
  Vector beta_star;   // p
  std::vector<Eigen::Index> support;  // ascending nonzero indices of beta_star
  std::optional<double> mu_star;
  LinkSpec link;
  ScoreModel design = ScoreModel::standard_gaussian();
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return covariates.rows(); }
  Eigen::Index p() const { return beta_star.size(); }
};

/// Matrix single index model sample: y_i = f(tr(X_i^T beta*)) + eps_i.
struct MatrixSimInstance {
  std::vector<Matrix> covariates;  // n matrices, d x d
  Vector responses;
  Matrix beta_star;  // symmetric d x d, unit Frobenius norm
  int rank = 0;
  std::optional<double> mu_star;
  LinkSpec link;
  ScoreModel design = ScoreModel::standard_gaussian();
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return static_cast<Eigen::Index>(covariates.size()); }
  Eigen::Index d() const { return beta_star.rows(); }
};

struct GenOptions {
  /// Monte-Carlo draws used to fill in mu_star; 0 skips the estimate
  /// (closed forms for identity and sign links are always filled in).
  int mu_star_samples = 100000;
};

struct MuStarEstimate {
  double value;
  double std_error;
};

Vector gen_sparse_beta(Eigen::Index p, Eigen::Index s, Rng& rng);
Matrix gen_lowrank_beta(Eigen::Index d, Eigen::Index r, Rng& rng);

/// Rescales beta so that the design's identifiability norm is one:
/// ||Sigma^{1/2} beta||_2 for Gaussian vector designs, ||beta||_2 otherwise.
Vector normalize_for_design(const Vector& beta, const ScoreModel& model);

SimInstance gen_vector_sim(const Vector& beta_star, const ScoreModel& model,
                           const LinkSpec& link, double noise_sigma,
                           Eigen::Index n, std::uint64_t seed,
                           const GenOptions& options = {});

MatrixSimInstance gen_matrix_sim(const Matrix& beta_star, const ScoreModel& model,
                                 const LinkSpec& link, double noise_sigma,
                                 Eigen::Index n, std::uint64_t seed,
                                 const GenOptions& options = {});

/// E[f'(Z)] for Z ~ N(0, 1) with its Monte-Carlo standard error. Identity
/// returns exactly 1 and Sign returns sqrt(2/pi), both with zero error.
MuStarEstimate mc_mu_star(const LinkSpec& link, int samples, std::uint64_t seed);

/// E[f'(<x, beta>)] with x drawn from `model`; used for non-Gaussian designs.
MuStarEstimate mc_mu_star_design(const LinkSpec& link, const ScoreModel& model,
                                 const Vector& beta, int samples, std::uint64_t seed);

/// Same, for matrix designs with index tr(X^T beta).
MuStarEstimate mc_mu_star_matrix_design(const LinkSpec& link, const ScoreModel& model,
                                        const Matrix& beta, int samples,
                                        std::uint64_t seed);

/// Even split: first floor(n/2) rows train, the remainder test.
std::pair<SimInstance, SimInstance> split_half(const SimInstance& inst);
std::pair<MatrixSimInstance, MatrixSimInstance> split_half(const MatrixSimInstance& inst);

/// Observation subset in the given row order.
SimInstance subset(const SimInstance& inst, const std::vector<Eigen::Index>& rows);

}  // namespace impreg
