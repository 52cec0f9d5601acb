#include "impreg/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "impreg/error.hpp"

namespace impreg {

KernelPredictor::KernelPredictor(Vector anchor_indices, Vector anchor_responses, double h,
                                 double radius, double center)
    : h_(h), radius_(radius), center_(center) {
  require(h > 0.0, ErrorCode::InvalidArgument, "kernel: bandwidth must be positive");
  require(radius > 0.0, ErrorCode::InvalidArgument, "kernel: radius must be positive");
  require(anchor_indices.size() == anchor_responses.size(), ErrorCode::DimensionMismatch,
          "kernel: anchor arrays differ in length");
  const auto n = static_cast<size_t>(anchor_indices.size());
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return anchor_indices(static_cast<Eigen::Index>(a)) <
           anchor_indices(static_cast<Eigen::Index>(b));
  });
  z_.resize(n);
  y_.resize(n);
  for (size_t k = 0; k < n; ++k) {
    z_[k] = anchor_indices(static_cast<Eigen::Index>(order[k]));
    y_[k] = anchor_responses(static_cast<Eigen::Index>(order[k]));
  }
}

double KernelPredictor::operator()(double z) const {
  if (!(std::abs(z - center_) <= radius_)) return 0.0;
  const auto lo = std::lower_bound(z_.begin(), z_.end(), z - h_);
  const auto hi = std::upper_bound(lo, z_.end(), z + h_);
  if (hi == lo) return 0.0;
  const auto a = lo - z_.begin();
  const auto b = hi - z_.begin();
  double sum = 0.0;
  for (auto k = a; k < b; ++k) sum += y_[static_cast<size_t>(k)];
  return sum / static_cast<double>(b - a);
}

double kernel_predict(const KernelPredictor& kp, double z) { return kp(z); }

Vector index_values(const SimInstance& inst, const Vector& beta_hat) {
  require(beta_hat.size() == inst.p(), ErrorCode::DimensionMismatch,
          "index_values: dimension mismatch");
  return inst.covariates * beta_hat;
}

Vector index_values(const MatrixSimInstance& inst, const Matrix& beta_hat) {
  require(beta_hat.rows() == inst.d() && beta_hat.cols() == inst.d(),
          ErrorCode::DimensionMismatch, "index_values: dimension mismatch");
  Vector z(inst.n());
  for (Eigen::Index i = 0; i < inst.n(); ++i)
    z(i) = inst.covariates[static_cast<size_t>(i)].cwiseProduct(beta_hat).sum();
  return z;
}

NormKind design_norm(const ScoreModel& model) {
  return model.is_gaussian_vector() ? NormKind::SigmaHalf : NormKind::L2;
}

namespace {

double design_norm_value(const ScoreModel& model, const Vector& beta) {
  if (model.is_gaussian_vector()) return std::sqrt(beta.dot(model.covariance() * beta));
  return beta.norm();
}

KernelPredictor make_predictor(Vector z, const Vector& y, double center,
                               const KernelOptions& options) {
  const double n = static_cast<double>(z.size());
  require(n > 0, ErrorCode::EmptyInstance, "fit_kernel: empty instance");
  const double h = options.h.value_or(options.bandwidth_constant * std::cbrt(1.0 / n));
  const double r = options.radius.value_or(2.0 * std::sqrt(std::log(std::max(n, 2.0))));
  return KernelPredictor(std::move(z), y, h, r, center);
}

}  // namespace

KernelPredictor fit_kernel(const SimInstance& inst, const Vector& beta_hat,
                           const KernelOptions& options) {
  require(inst.n() > 0, ErrorCode::EmptyInstance, "fit_kernel: empty instance");
  require(beta_hat.size() == inst.p(), ErrorCode::DimensionMismatch,
          "fit_kernel: dimension mismatch");
  require(std::abs(design_norm_value(inst.design, beta_hat) - 1.0) <= 1e-6,
          ErrorCode::InvalidArgument, "fit_kernel: beta_hat is not normalized");
  const double center =
      inst.design.is_gaussian_vector() ? inst.design.mean().dot(beta_hat) : 0.0;
  return make_predictor(index_values(inst, beta_hat), inst.responses, center, options);
}

KernelPredictor fit_kernel(const MatrixSimInstance& inst, const Matrix& beta_hat,
                           const KernelOptions& options) {
  require(inst.n() > 0, ErrorCode::EmptyInstance, "fit_kernel: empty instance");
  require(std::abs(beta_hat.norm() - 1.0) <= 1e-6, ErrorCode::InvalidArgument,
          "fit_kernel: beta_hat is not normalized");
  return make_predictor(index_values(inst, beta_hat), inst.responses, 0.0, options);
}

namespace {

double mean_sq_error(const KernelPredictor& kp, const Vector& z, const Vector& y) {
  require(z.size() > 0, ErrorCode::EmptyInstance, "prediction_risk: empty test set");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double e = y(i) - kp(z(i));
    acc += e * e;
  }
  return acc / static_cast<double>(z.size());
}

}  // namespace

double prediction_risk(const KernelPredictor& kp, const SimInstance& test,
                       const Vector& beta_hat) {
  return mean_sq_error(kp, index_values(test, beta_hat), test.responses);
}

double prediction_risk(const KernelPredictor& kp, const MatrixSimInstance& test,
                       const Matrix& beta_hat) {
  return mean_sq_error(kp, index_values(test, beta_hat), test.responses);
}

std::optional<std::pair<size_t, size_t>> find_plateau(const Trajectory& traj,
                                                      double rel_tol,
                                                      size_t min_records) {
  const auto& recs = traj.records;
  const size_t n = recs.size();
  if (n < 3) return std::nullopt;
  auto flat_step = [&](size_t k) {  // change between records k-1 and k
    const double prev = recs[k - 1].loss;
    const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
    return std::abs(recs[k].loss - prev) <= rel_tol * scale;
  };
  std::vector<char> in_plateau(n, 0);
  for (size_t k = 2; k < n; ++k)
    if (flat_step(k - 1) && flat_step(k)) in_plateau[k - 2] = in_plateau[k - 1] = in_plateau[k] = 1;

  size_t k = 0;
  while (k < n) {
    if (!in_plateau[k]) {
      ++k;
      continue;
    }
    size_t end = k;
    while (end + 1 < n && in_plateau[end + 1]) ++end;
    // Skip the initial stretch where beta is still identically zero.
    const bool trivial = recs[k].beta.isZero(0.0);
    if (!trivial && end - k + 1 >= min_records) return std::make_pair(k, end);
    k = end + 1;
  }
  return std::nullopt;
}

namespace {

std::vector<size_t> spread(size_t first, size_t last, int m) {
  std::vector<size_t> out;
  if (m == 1) return {first};
  const double step = static_cast<double>(last - first) / (m - 1);
  for (int j = 0; j < m; ++j) {
    const auto idx = first + static_cast<size_t>(std::llround(j * step));
    if (out.empty() || idx != out.back()) out.push_back(idx);
  }
  return out;
}

template <class Instance, class Estimate>
SelectionReport select_impl(const Trajectory& traj, const Instance& train,
                            const Instance& test, const SelectionOptions& options,
                            Estimate&& normalized_estimate) {
  require(options.m >= 1, ErrorCode::InvalidArgument, "select: m must be >= 1");
  require(options.plateau_rel_tol > 0.0, ErrorCode::InvalidArgument,
          "select: plateau_rel_tol must be positive");
  const auto m = static_cast<size_t>(options.m);
  require(traj.records.size() >= m, ErrorCode::InvalidArgument,
          "select: trajectory has fewer records than m");
  require(test.n() > 0, ErrorCode::EmptyInstance, "select: empty test instance");

  SelectionReport report;
  size_t first = 0, last = traj.records.size() - 1;
  if (auto plateau = find_plateau(traj, options.plateau_rel_tol, m)) {
    report.plateau_found = true;
    std::tie(first, last) = *plateau;
  }

  double best = std::numeric_limits<double>::infinity();
  for (size_t idx : spread(first, last, options.m)) {
    const auto& rec = traj.records[idx];
    SelectionCandidate cand{rec.t, rec.loss, std::numeric_limits<double>::infinity()};
    if (auto beta_hat = normalized_estimate(rec.beta)) {
      const KernelPredictor kp = fit_kernel(train, *beta_hat, options.kernel);
      cand.test_risk = prediction_risk(kp, test, *beta_hat);
    }
    if (report.candidates.empty()) report.t_selected = cand.t;
    // Candidates arrive in increasing t; strict < keeps the earliest tie.
    if (cand.test_risk < best) {
      best = cand.test_risk;
      report.t_selected = cand.t;
    }
    report.candidates.push_back(cand);
  }
  return report;
}

}  // namespace

SelectionReport select_stopping_time(const Trajectory& traj, const SimInstance& train,
                                     const SimInstance& test,
                                     const SelectionOptions& options) {
  require(traj.kind == TrajectoryKind::Vector, ErrorCode::InvalidArgument,
          "select: vector data needs a vector trajectory");
  const ScoreModel& design = train.design;
  return select_impl(traj, train, test, options,
                     [&](const Matrix& beta) -> std::optional<Vector> {
                       const Vector b = beta.col(0);
                       const double norm = design_norm_value(design, b);
                       if (!(norm > 1e-14)) return std::nullopt;
                       return Vector(b / norm);
                     });
}

SelectionReport select_stopping_time(const Trajectory& traj,
                                     const MatrixSimInstance& train,
                                     const MatrixSimInstance& test,
                                     const SelectionOptions& options) {
  require(traj.kind == TrajectoryKind::Matrix, ErrorCode::InvalidArgument,
          "select: matrix data needs a matrix trajectory");
  return select_impl(traj, train, test, options,
                     [&](const Matrix& beta) -> std::optional<Matrix> {
                       const double norm = beta.norm();
                       if (!(norm > 1e-14)) return std::nullopt;
                       return Matrix(beta / norm);
                     });
}

}  // namespace impreg
