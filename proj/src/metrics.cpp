#include <algorithm>
#include <cmath>

#include "impreg/bench.hpp"
#include "impreg/error.hpp"
#include "impreg/robust.hpp"

namespace impreg {

double dist_metric(const Matrix& beta_hat, const Matrix& beta_star) {
  require(beta_hat.rows() == beta_star.rows() && beta_hat.cols() == beta_star.cols(),
          ErrorCode::DimensionMismatch, "dist_metric: shape mismatch");
  const double norm = beta_hat.norm();
  require(norm > 1e-14, ErrorCode::ZeroNorm, "dist_metric: zero estimate");
  const Matrix unit = beta_hat / norm;
  return std::min((unit - beta_star).norm(), (unit + beta_star).norm());
}

SupportMetrics support_metrics(const std::vector<Eigen::Index>& estimated,
                               const std::vector<Eigen::Index>& truth, Eigen::Index p) {
  std::vector<char> in_truth(static_cast<size_t>(p), 0);
  for (Eigen::Index j : truth) {
    require(j >= 0 && j < p, ErrorCode::InvalidArgument, "support_metrics: index out of range");
    in_truth[static_cast<size_t>(j)] = 1;
  }
  std::vector<char> seen(static_cast<size_t>(p), 0);
  double hits = 0.0, false_hits = 0.0, size = 0.0;
  for (Eigen::Index j : estimated) {
    require(j >= 0 && j < p, ErrorCode::InvalidArgument, "support_metrics: index out of range");
    if (seen[static_cast<size_t>(j)]) continue;
    seen[static_cast<size_t>(j)] = 1;
    size += 1.0;
    (in_truth[static_cast<size_t>(j)] ? hits : false_hits) += 1.0;
  }
  const double truth_size = static_cast<double>(
      std::count(in_truth.begin(), in_truth.end(), char{1}));
  return {false_hits / std::max(size, 1.0), truth_size > 0 ? hits / truth_size : 0.0};
}

std::vector<Eigen::Index> support_of(const Vector& beta) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) out.push_back(j);
  return out;
}

Vector l1_baseline(const Vector& phi, double lambda) {
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "l1_baseline: lambda must be nonnegative");
  const double half = 0.5 * lambda;
  return phi.unaryExpr([half](double x) {
    const double mag = std::abs(x) - half;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
  });
}

CvLasso l1_baseline_cv(const SimInstance& inst, int folds, int grid_size) {
  require(folds >= 2, ErrorCode::InvalidArgument, "l1_baseline_cv: need >= 2 folds");
  require(grid_size >= 1, ErrorCode::InvalidArgument, "l1_baseline_cv: empty grid");
  const Eigen::Index n = inst.n();
  require(n >= folds, ErrorCode::EmptyInstance, "l1_baseline_cv: fewer rows than folds");
  const Eigen::Index p = inst.p();

  // Per-fold sums of y_i S(x_i); folds are contiguous blocks.
  std::vector<Vector> fold_sums(static_cast<size_t>(folds), Vector::Zero(p));
  std::vector<double> fold_sizes(static_cast<size_t>(folds), 0.0);
  for (int k = 0; k < folds; ++k) {
    const Eigen::Index lo = n * k / folds, hi = n * (k + 1) / folds;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = lo; i < hi; ++i) rows.push_back(i);
    const SimInstance part = subset(inst, rows);
    fold_sums[static_cast<size_t>(k)] =
        plain_moment(part, inst.design).vector() * static_cast<double>(hi - lo);
    fold_sizes[static_cast<size_t>(k)] = static_cast<double>(hi - lo);
  }
  Vector total = Vector::Zero(p);
  for (const auto& s : fold_sums) total += s;
  const Vector phi = total / static_cast<double>(n);

  CvLasso out;
  const double scale = phi.cwiseAbs().maxCoeff();
  const double lo = 0.01 * scale, hi = 2.0 * scale;
  for (int g = 0; g < grid_size; ++g) {
    const double frac = grid_size == 1 ? 0.0 : static_cast<double>(g) / (grid_size - 1);
    out.lambdas.push_back(scale > 0.0 ? lo * std::pow(hi / lo, frac) : 0.0);
  }
  double best = INFINITY;
  for (double lambda : out.lambdas) {
    double loss = 0.0;
    for (int k = 0; k < folds; ++k) {
      const auto kk = static_cast<size_t>(k);
      const Vector train = (total - fold_sums[kk]) / (static_cast<double>(n) - fold_sizes[kk]);
      const Vector valid = fold_sums[kk] / fold_sizes[kk];
      const Vector b = l1_baseline(train, lambda);
      loss += b.dot(b) - 2.0 * b.dot(valid);
    }
    loss /= folds;
    out.cv_losses.push_back(loss);
    if (loss < best) {
      best = loss;
      out.lambda = lambda;
    }
  }
  out.beta = l1_baseline(phi, out.lambda);
  return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument,
          "fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::InvalidArgument, "fit_line: x values are constant");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, my - slope * mx, r2};
}

}  // namespace impreg
