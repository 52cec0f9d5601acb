#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "impreg/optim.hpp"
#include "impreg/simgen.hpp"

namespace impreg {

/// Box-kernel regression of responses on a one-dimensional index.
class KernelPredictor {
 public:
  KernelPredictor(Vector anchor_indices, Vector anchor_responses, double h, double radius,
                  double center);

  /// 0 when |z - center| > R; otherwise the average response of anchors with
  /// |z - Z_i| <= h, with 0/0 read as 0.
  double operator()(double z) const;

  double bandwidth() const noexcept { return h_; }
  double radius() const noexcept { return radius_; }
  double center() const noexcept { return center_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(z_.size()); }

 private:
  std::vector<double> z_;       // sorted anchor indices
  std::vector<double> y_;       // responses in z_ order
  double h_;
  double radius_;
  double center_;
};

struct KernelOptions {
  std::optional<double> h;
  std::optional<double> radius;
  double bandwidth_constant = 1.0;  // h = c_h n^{-1/3}
};

/// Index Z = <x, beta_hat> (vector) or tr(X^T beta_hat) (matrix), with
/// center mu^T beta_hat for Gaussian vector designs.
Vector index_values(const SimInstance& inst, const Vector& beta_hat);
Vector index_values(const MatrixSimInstance& inst, const Matrix& beta_hat);

/// The normalization used for identifiability under this design.
NormKind design_norm(const ScoreModel& model);

KernelPredictor fit_kernel(const SimInstance& inst, const Vector& beta_hat,
                           const KernelOptions& options = {});
KernelPredictor fit_kernel(const MatrixSimInstance& inst, const Matrix& beta_hat,
                           const KernelOptions& options = {});

double kernel_predict(const KernelPredictor& kp, double z);

double prediction_risk(const KernelPredictor& kp, const SimInstance& test,
                       const Vector& beta_hat);
double prediction_risk(const KernelPredictor& kp, const MatrixSimInstance& test,
                       const Matrix& beta_hat);

struct SelectionCandidate {
  std::int64_t t;
  double train_loss;
  double test_risk;
};

struct SelectionReport {
  std::int64_t t_selected = 0;
  std::vector<SelectionCandidate> candidates;
  bool plateau_found = false;
};

struct SelectionOptions {
  int m = 10;
  double plateau_rel_tol = 1e-3;
  KernelOptions kernel;
};

/// Record indices [first, last] of the first flat stretch of the training
/// loss, where every step between consecutive records inside a sliding window
/// of three changes the loss by at most `rel_tol` relative. nullopt if no
/// stretch holds at least `min_records` records.
std::optional<std::pair<size_t, size_t>> find_plateau(const Trajectory& traj,
                                                      double rel_tol,
                                                      size_t min_records);

/// Chooses the stopping time by out-of-sample prediction risk of the kernel
/// link estimate over m candidates spread across the loss plateau.
SelectionReport select_stopping_time(const Trajectory& traj, const SimInstance& train,
                                     const SimInstance& test,
                                     const SelectionOptions& options = {});
SelectionReport select_stopping_time(const Trajectory& traj,
                                     const MatrixSimInstance& train,
                                     const MatrixSimInstance& test,
                                     const SelectionOptions& options = {});

}  // namespace impreg
