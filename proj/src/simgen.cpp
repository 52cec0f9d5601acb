#include "impreg/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "impreg/error.hpp"

namespace impreg {

namespace {

// Sub-stream identifiers inside one instance seed.
constexpr std::uint64_t kStreamCovariates = 1;
constexpr std::uint64_t kStreamNoise = 2;
constexpr std::uint64_t kStreamMuStar = 3;

std::vector<Eigen::Index> fisher_yates_prefix(Eigen::Index n, Eigen::Index k,
                                              Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<size_t>(k));
  return idx;
}

double fair_sign(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

MuStarEstimate summarize(double sum, double sum_sq, int samples) {
  const double mean = sum / samples;
  const double var = std::max(0.0, (sum_sq - samples * mean * mean) / (samples - 1));
  return {mean, std::sqrt(var / samples)};
}

std::optional<MuStarEstimate> closed_form_mu_star(const LinkSpec& link,
                                                  bool centered_gaussian) {
  if (link.kind() == LinkKind::Identity) return MuStarEstimate{1.0, 0.0};
  if (link.kind() == LinkKind::Sign && centered_gaussian)
    return MuStarEstimate{std::sqrt(2.0 / std::numbers::pi), 0.0};
  return std::nullopt;
}

Vector gaussian_noise(Eigen::Index n, double sigma, Rng rng) {
  Vector eps = Vector::Zero(n);
  if (sigma > 0.0) {
    std::normal_distribution<double> dist(0.0, sigma);
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = dist(rng);
  }
  return eps;
}

}  // namespace

Vector gen_sparse_beta(Eigen::Index p, Eigen::Index s, Rng& rng) {
  require(s >= 1 && s <= p, ErrorCode::InvalidArgument,
          "gen_sparse_beta: need 1 <= s <= p");
  Vector beta = Vector::Zero(p);
  const double mag = 1.0 / std::sqrt(static_cast<double>(s));
  for (Eigen::Index j : fisher_yates_prefix(p, s, rng)) beta(j) = fair_sign(rng) * mag;
  return beta;
}

Matrix gen_lowrank_beta(Eigen::Index d, Eigen::Index r, Rng& rng) {
  require(r >= 1 && r <= d, ErrorCode::InvalidArgument,
          "gen_lowrank_beta: need 1 <= r <= d");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);

  // Haar orthogonal: Q from QR, columns flipped by sign(diag R).
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix& rmat = qr.matrixQR();
  for (Eigen::Index k = 0; k < d; ++k)
    if (rmat(k, k) < 0.0) q.col(k) = -q.col(k);

  Vector diag = Vector::Zero(d);
  const double mag = 1.0 / std::sqrt(static_cast<double>(r));
  for (Eigen::Index k : fisher_yates_prefix(d, r, rng)) diag(k) = fair_sign(rng) * mag;

  Matrix beta = q * diag.asDiagonal() * q.transpose();
  beta = 0.5 * (beta + beta.transpose());
  return beta / beta.norm();
}

Vector normalize_for_design(const Vector& beta, const ScoreModel& model) {
  double norm;
  if (model.is_gaussian_vector()) {
    require(beta.size() == model.mean().size(), ErrorCode::DimensionMismatch,
            "normalize_for_design: dimension mismatch");
    norm = std::sqrt(beta.dot(model.covariance() * beta));
  } else {
    norm = beta.norm();
  }
  require(norm > 1e-14, ErrorCode::ZeroNorm, "normalize_for_design: zero vector");
  return beta / norm;
}

SimInstance gen_vector_sim(const Vector& beta_star, const ScoreModel& model,
                           const LinkSpec& link, double noise_sigma,
                           Eigen::Index n, std::uint64_t seed,
                           const GenOptions& options) {
  require(noise_sigma >= 0.0, ErrorCode::InvalidArgument,
          "gen_vector_sim: noise_sigma must be nonnegative");
  require(n >= 0, ErrorCode::InvalidArgument, "gen_vector_sim: negative n");
  const Eigen::Index p = beta_star.size();
  require(p > 0, ErrorCode::InvalidArgument, "gen_vector_sim: empty beta");
  if (auto dim = model.dimension())
    require(*dim == p, ErrorCode::DimensionMismatch,
            "gen_vector_sim: beta and design dimensions differ");

  const double ident = model.is_gaussian_vector()
                           ? std::sqrt(beta_star.dot(model.covariance() * beta_star))
                           : beta_star.norm();
  require(std::abs(ident - 1.0) <= 1e-10, ErrorCode::InvalidArgument,
          "gen_vector_sim: beta_star violates the unit-norm identifiability "
          "condition for this design");

  SimInstance inst;
  inst.beta_star = beta_star;
  for (Eigen::Index j = 0; j < p; ++j)
    if (beta_star(j) != 0.0) inst.support.push_back(j);
  inst.link = link;
  inst.design = model;
  inst.noise_sigma = noise_sigma;
  inst.seed = seed;

  Rng root(seed);
  Rng cov_rng = root.split(kStreamCovariates);
  inst.covariates = sample_covariates(model, n, p, cov_rng);
  const Vector index = inst.covariates * beta_star;
  inst.responses = index.unaryExpr([&](double z) { return link(z); }) +
                   gaussian_noise(n, noise_sigma, root.split(kStreamNoise));

  const std::uint64_t mu_seed = derive_seed(seed, kStreamMuStar);
  if (auto closed = closed_form_mu_star(link, model.is_centered_gaussian())) {
    inst.mu_star = closed->value;
  } else if (options.mu_star_samples > 1 && link.has_derivative()) {
    inst.mu_star = model.is_centered_gaussian()
                       ? mc_mu_star(link, options.mu_star_samples, mu_seed).value
                       : mc_mu_star_design(link, model, beta_star,
                                           options.mu_star_samples, mu_seed).value;
  }
  return inst;
}

MatrixSimInstance gen_matrix_sim(const Matrix& beta_star, const ScoreModel& model,
                                 const LinkSpec& link, double noise_sigma,
                                 Eigen::Index n, std::uint64_t seed,
                                 const GenOptions& options) {
  require(noise_sigma >= 0.0, ErrorCode::InvalidArgument,
          "gen_matrix_sim: noise_sigma must be nonnegative");
  require(n >= 0, ErrorCode::InvalidArgument, "gen_matrix_sim: negative n");
  require(model.is_iid(), ErrorCode::Unsupported,
          "gen_matrix_sim: matrix designs need an i.i.d. entry model");
  const Eigen::Index d = beta_star.rows();
  require(d > 0 && beta_star.cols() == d, ErrorCode::DimensionMismatch,
          "gen_matrix_sim: beta_star must be square");
  require(asymmetry(beta_star) <= 1e-12, ErrorCode::NotSymmetric,
          "gen_matrix_sim: beta_star must be symmetric");
  require(std::abs(beta_star.norm() - 1.0) <= 1e-10, ErrorCode::InvalidArgument,
          "gen_matrix_sim: beta_star must have unit Frobenius norm");

  MatrixSimInstance inst;
  inst.beta_star = beta_star;
  const SymmetricEigen eig = jacobi_eigen(beta_star);
  inst.rank = static_cast<int>((eig.values.array().abs() > 1e-10).count());
  inst.link = link;
  inst.design = model;
  inst.noise_sigma = noise_sigma;
  inst.seed = seed;

  Rng root(seed);
  Rng cov_rng = root.split(kStreamCovariates);
  inst.covariates.reserve(static_cast<size_t>(n));
  Vector index(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inst.covariates.push_back(sample_matrix_covariate(model, d, cov_rng));
    index(i) = inst.covariates.back().cwiseProduct(beta_star).sum();
  }
  inst.responses = index.unaryExpr([&](double z) { return link(z); }) +
                   gaussian_noise(n, noise_sigma, root.split(kStreamNoise));

  const std::uint64_t mu_seed = derive_seed(seed, kStreamMuStar);
  if (auto closed = closed_form_mu_star(link, model.is_centered_gaussian())) {
    inst.mu_star = closed->value;
  } else if (options.mu_star_samples > 1 && link.has_derivative()) {
    inst.mu_star = model.is_centered_gaussian()
                       ? mc_mu_star(link, options.mu_star_samples, mu_seed).value
                       : mc_mu_star_matrix_design(link, model, beta_star,
                                                  options.mu_star_samples, mu_seed)
                             .value;
  }
  return inst;
}

MuStarEstimate mc_mu_star(const LinkSpec& link, int samples, std::uint64_t seed) {
  if (auto closed = closed_form_mu_star(link, true)) return *closed;
  require(link.has_derivative(), ErrorCode::Unsupported,
          "mc_mu_star: link has no derivative");
  require(samples >= 2, ErrorCode::InvalidArgument, "mc_mu_star: need >= 2 samples");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double g = link.derivative(normal(rng));
    sum += g;
    sum_sq += g * g;
  }
  return summarize(sum, sum_sq, samples);
}

MuStarEstimate mc_mu_star_design(const LinkSpec& link, const ScoreModel& model,
                                 const Vector& beta, int samples, std::uint64_t seed) {
  if (link.kind() == LinkKind::Identity) return {1.0, 0.0};
  require(link.has_derivative(), ErrorCode::Unsupported,
          "mc_mu_star_design: link has no derivative");
  require(samples >= 2, ErrorCode::InvalidArgument, "mc_mu_star_design: need >= 2 samples");
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  if (model.is_gaussian_vector()) {
    // <x, beta> ~ N(mu^T beta, beta^T Sigma beta)
    const double m = model.mean().dot(beta);
    const double sd = std::sqrt(beta.dot(model.covariance() * beta));
    std::normal_distribution<double> normal(m, sd);
    for (int k = 0; k < samples; ++k) {
      const double g = link.derivative(normal(rng));
      sum += g;
      sum_sq += g * g;
    }
    return summarize(sum, sum_sq, samples);
  }
  // Only the support of beta contributes to the index.
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) support.push_back(j);
  const auto s = static_cast<Eigen::Index>(support.size());
  Vector coef(s);
  for (Eigen::Index k = 0; k < s; ++k) coef(k) = beta(support[static_cast<size_t>(k)]);
  for (int k = 0; k < samples; ++k) {
    const Matrix x = sample_covariates(model, 1, s, rng);
    const double g = link.derivative(x.row(0).dot(coef));
    sum += g;
    sum_sq += g * g;
  }
  return summarize(sum, sum_sq, samples);
}

MuStarEstimate mc_mu_star_matrix_design(const LinkSpec& link, const ScoreModel& model,
                                        const Matrix& beta, int samples,
                                        std::uint64_t seed) {
  if (link.kind() == LinkKind::Identity) return {1.0, 0.0};
  require(link.has_derivative(), ErrorCode::Unsupported,
          "mc_mu_star_matrix_design: link has no derivative");
  require(samples >= 2, ErrorCode::InvalidArgument,
          "mc_mu_star_matrix_design: need >= 2 samples");
  Rng rng(seed);
  const Eigen::Index d = beta.rows();
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Matrix x = sample_matrix_covariate(model, d, rng);
    const double g = link.derivative(x.cwiseProduct(beta).sum());
    sum += g;
    sum_sq += g * g;
  }
  return summarize(sum, sum_sq, samples);
}

SimInstance subset(const SimInstance& inst, const std::vector<Eigen::Index>& rows) {
  SimInstance out = inst;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.covariates.resize(m, inst.p());
  out.responses.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = rows[static_cast<size_t>(k)];
    require(i >= 0 && i < inst.n(), ErrorCode::InvalidArgument, "subset: row out of range");
    out.covariates.row(k) = inst.covariates.row(i);
    out.responses(k) = inst.responses(i);
  }
  return out;
}

std::pair<SimInstance, SimInstance> split_half(const SimInstance& inst) {
  const Eigen::Index half = inst.n() / 2;
  SimInstance train = inst, test = inst;
  train.covariates = inst.covariates.topRows(half);
  train.responses = inst.responses.head(half);
  test.covariates = inst.covariates.bottomRows(inst.n() - half);
  test.responses = inst.responses.tail(inst.n() - half);
  return {std::move(train), std::move(test)};
}

std::pair<MatrixSimInstance, MatrixSimInstance> split_half(const MatrixSimInstance& inst) {
  const Eigen::Index half = inst.n() / 2;
  MatrixSimInstance train = inst, test = inst;
  train.covariates.assign(inst.covariates.begin(), inst.covariates.begin() + half);
  train.responses = inst.responses.head(half);
  test.covariates.assign(inst.covariates.begin() + half, inst.covariates.end());
  test.responses = inst.responses.tail(inst.n() - half);
  return {std::move(train), std::move(test)};
}

}  // namespace impreg
