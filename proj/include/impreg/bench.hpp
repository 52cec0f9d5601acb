#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "impreg/link.hpp"
#include "impreg/optim.hpp"
#include "impreg/robust.hpp"
#include "impreg/score.hpp"
#include "impreg/select.hpp"
#include "impreg/simgen.hpp"

namespace impreg {

// ---------------------------------------------------------------- metrics

/// Sign-invariant distance between beta_hat / ||beta_hat||_F and beta*.
double dist_metric(const Matrix& beta_hat, const Matrix& beta_star);

struct SupportMetrics {
  double fdr;
  double tpr;
};

/// FDR = |est \ truth| / max(|est|, 1), TPR = |est & truth| / |truth|
/// (0 for an empty truth).
SupportMetrics support_metrics(const std::vector<Eigen::Index>& estimated,
                               const std::vector<Eigen::Index>& truth, Eigen::Index p);

std::vector<Eigen::Index> support_of(const Vector& beta);

/// Exact minimizer of <b, b> - 2 <b, phi> + lambda ||b||_1:
/// b_j = sign(phi_j) max(|phi_j| - lambda / 2, 0).
Vector l1_baseline(const Vector& phi, double lambda);

struct CvLasso {
  double lambda = 0.0;
  Vector beta;
  std::vector<double> lambdas;
  std::vector<double> cv_losses;
};

/// K-fold cross-validated l1 baseline on the plain score moment. The lambda
/// grid is `grid_size` log-spaced values over [0.01, 2] * ||phi||_inf and the
/// validation loss is <b, b> - 2 <b, phi_fold>.
CvLasso l1_baseline_cv(const SimInstance& inst, int folds = 5, int grid_size = 20);

struct LinearFit {
  double slope;
  double intercept;
  double r_squared;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ------------------------------------------------------------ experiments

enum class ExperimentKind {
  Trajectory,
  RateSweepVector,
  RateSweepMatrix,
  SupportRecovery,
  OneBit,
  PredictionRisk,
};

const char* to_string(ExperimentKind kind) noexcept;

/// How the grid values translate into a sample size.
enum class GridUnit {
  SampleSize,    // n directly
  Rate,          // sqrt(s log p / n) or sqrt(r d log d / n)
  PerSLogP,      // n = value * s * log p
};

struct RobustSpec {
  enum class Mode { None, Truncate, Shrink };
  enum class Rule { Simulation, Theory, Fixed };
  Mode mode = Mode::None;
  Rule rule = Rule::Simulation;
  std::optional<double> value;          // Fixed rule
  std::optional<double> fourth_moment;  // Theory rule; defaults to empirical
};

struct SelectionSpec {
  enum class Mode { Oracle, OutOfSample, Fixed, KnownLink };
  Mode mode = Mode::Oracle;
  int m = 10;
  double plateau_rel_tol = 1e-3;
  double bandwidth_constant = 1.0;
  bool refit = true;
  std::int64_t fixed_t = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Trajectory;
  ScoreModel design = ScoreModel::standard_gaussian();
  LinkSpec link;
  double noise_sigma = 0.5;
  Eigen::Index dim = 0;       // p (vector) or d (matrix)
  Eigen::Index sparsity = 1;  // s (vector) or r (matrix)
  std::vector<double> grid;
  GridUnit grid_unit = GridUnit::SampleSize;
  int trials = 1;
  SolverConfig solver;
  RobustSpec robust;
  SelectionSpec selection;
  /// Threshold lambda = factor * alpha for support / rank estimates.
  std::optional<double> threshold_over_alpha;
  bool baseline = false;  // l1 CV baseline rows (vector experiments)
  int cv_folds = 5;
  int cv_grid = 20;
  int mu_star_samples = 0;
  std::uint64_t master_seed = 0;
  bool record_wall_time = false;

  bool is_matrix() const { return kind == ExperimentKind::RateSweepMatrix; }
  /// Fills in defaults (grid, unit) and validates.
  void finalize();
  Eigen::Index sample_size(double grid_value) const;
};

struct MetricsRow {
  ExperimentKind kind;
  int grid_index = 0;
  double grid_value = 0.0;
  Eigen::Index n = 0;
  Eigen::Index dim = 0;
  Eigen::Index sparsity = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::optional<std::int64_t> selected_t;
  std::optional<double> dist;
  std::optional<double> fdr;
  std::optional<double> tpr;
  std::optional<int> rank;
  std::optional<double> risk;
  std::string error;  // empty on success, else an error code name
  double wall_ms = 0.0;
};

/// The moment estimate an experiment or CLI fit descends toward.
MomentEstimate build_moment(const SimInstance& inst, const RobustSpec& spec);
MomentEstimate build_moment(const MatrixSimInstance& inst, const RobustSpec& spec);

/// Per-trial seed; shared by every grid point of that trial.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Runs every (grid point, trial) task on `threads` workers. Rows come back
/// in (grid, trial, method) order regardless of completion order.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config, int threads = 1);

struct SummaryRow {
  int grid_index;
  double grid_value;
  Eigen::Index n;
  std::string method;
  int ok_trials;
  int failed_trials;
  std::optional<double> mean_dist;
  std::optional<double> mean_fdr;
  std::optional<double> mean_tpr;
  std::optional<double> mean_risk;
  std::optional<double> exact_rank_fraction;
};

std::vector<SummaryRow> summarize(const ExperimentConfig& config,
                                  const std::vector<MetricsRow>& rows);

}  // namespace impreg
