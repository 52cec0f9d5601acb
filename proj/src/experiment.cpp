#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "impreg/bench.hpp"
#include "impreg/error.hpp"
#include "impreg/robust.hpp"

namespace impreg {

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Trajectory: return "Trajectory";
    case ExperimentKind::RateSweepVector: return "RateSweepVector";
    case ExperimentKind::RateSweepMatrix: return "RateSweepMatrix";
    case ExperimentKind::SupportRecovery: return "SupportRecovery";
    case ExperimentKind::OneBit: return "OneBit";
    case ExperimentKind::PredictionRisk: return "PredictionRisk";
  }
  return "?";
}

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(lo + (hi - lo) * k / (count - 1));
  return out;
}

}  // namespace

void ExperimentConfig::finalize() {
  if (grid.empty()) {
    switch (kind) {
      case ExperimentKind::Trajectory: grid = {1000}; grid_unit = GridUnit::SampleSize; break;
      case ExperimentKind::RateSweepVector: grid = linspace(0.25, 0.4, 8); grid_unit = GridUnit::Rate; break;
      case ExperimentKind::RateSweepMatrix: grid = linspace(0.15, 0.35, 8); grid_unit = GridUnit::Rate; break;
      case ExperimentKind::SupportRecovery: grid = {10}; grid_unit = GridUnit::PerSLogP; break;
      case ExperimentKind::OneBit: grid = {5}; grid_unit = GridUnit::PerSLogP; break;
      case ExperimentKind::PredictionRisk: grid = {500, 2000, 8000}; grid_unit = GridUnit::SampleSize; break;
    }
  }
  if (kind == ExperimentKind::SupportRecovery) {
    if (!threshold_over_alpha) threshold_over_alpha = 5.0;
    baseline = true;
  }
  require(trials >= 1, ErrorCode::Config, "experiment: trials must be >= 1");
  require(dim >= 1, ErrorCode::Config, "experiment: dimension must be >= 1");
  require(sparsity >= 1 && sparsity <= dim, ErrorCode::Config,
          "experiment: need 1 <= sparsity <= dim");
  require(noise_sigma >= 0.0, ErrorCode::Config, "experiment: noise_sigma must be >= 0");
  require(cv_folds >= 2 && cv_grid >= 1, ErrorCode::Config, "experiment: bad CV settings");
  for (double v : grid) require(v > 0.0, ErrorCode::Config, "experiment: grid values must be positive");
  if (kind == ExperimentKind::OneBit)
    require(link.kind() == LinkKind::Sign, ErrorCode::Config, "experiment: OneBit needs the sign link");
  if (is_matrix()) {
    require(design.is_iid(), ErrorCode::Config, "experiment: matrix designs must be i.i.d.");
    require(robust.mode != RobustSpec::Mode::Truncate, ErrorCode::Config,
            "experiment: truncation applies to vector experiments");
    require(selection.mode != SelectionSpec::Mode::KnownLink, ErrorCode::Config,
            "experiment: known-link selection is vector-only");
  } else {
    require(robust.mode != RobustSpec::Mode::Shrink, ErrorCode::Config,
            "experiment: spectral shrinkage applies to matrix experiments");
    if (auto pdim = design.dimension())
      require(*pdim == dim, ErrorCode::Config, "experiment: design dimension differs from dim");
  }
  if (robust.mode != RobustSpec::Mode::None && robust.rule == RobustSpec::Rule::Fixed)
    require(robust.value && *robust.value > 0.0, ErrorCode::Config,
            "experiment: fixed robust rule needs a positive value");
  solver.validate();
}

Eigen::Index ExperimentConfig::sample_size(double v) const {
  const double p = static_cast<double>(dim);
  const double s = static_cast<double>(sparsity);
  const double complexity = is_matrix() ? s * p * std::log(p) : s * std::log(p);
  double n = 0.0;
  switch (grid_unit) {
    case GridUnit::SampleSize: n = std::round(v); break;
    case GridUnit::Rate: n = std::ceil(complexity / (v * v)); break;
    case GridUnit::PerSLogP: n = std::ceil(v * s * std::log(p)); break;
  }
  require(n >= 1.0 && n < 1e9, ErrorCode::Config, "experiment: sample size out of range");
  return static_cast<Eigen::Index>(n);
}

static double resolve_fourth_moment(const RobustSpec& spec, const Vector& responses) {
  return spec.fourth_moment.value_or(empirical_fourth_moment(responses));
}

MomentEstimate build_moment(const SimInstance& inst, const RobustSpec& spec) {
  if (spec.mode == RobustSpec::Mode::None) return plain_moment(inst, inst.design);
  const double n = static_cast<double>(inst.n());
  const double p = static_cast<double>(inst.p());
  double tau = 0.0;
  switch (spec.rule) {
    case RobustSpec::Rule::Simulation: tau = simulation_truncation_level(n, p); break;
    case RobustSpec::Rule::Theory:
      tau = truncation_level(resolve_fourth_moment(spec, inst.responses), n, p);
      break;
    case RobustSpec::Rule::Fixed: tau = *spec.value; break;
  }
  return truncated_moment_vector(inst, inst.design, tau);
}

MomentEstimate build_moment(const MatrixSimInstance& inst, const RobustSpec& spec) {
  if (spec.mode == RobustSpec::Mode::None) return plain_moment(inst, inst.design);
  const double n = static_cast<double>(inst.n());
  const double d = static_cast<double>(inst.d());
  double kappa = 0.0;
  switch (spec.rule) {
    case RobustSpec::Rule::Simulation: kappa = simulation_shrinkage_level(n, d); break;
    case RobustSpec::Rule::Theory:
      kappa = shrinkage_level(resolve_fourth_moment(spec, inst.responses), n, d);
      break;
    case RobustSpec::Rule::Fixed: kappa = *spec.value; break;
  }
  return robust_moment_matrix(inst, inst.design, kappa);
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, static_cast<std::uint64_t>(trial));
}

namespace {

struct TrialSeeds {
  std::uint64_t trial;
  std::uint64_t beta;
  std::uint64_t data;
  std::uint64_t test;
};

TrialSeeds seeds_for(const ExperimentConfig& cfg, int trial) {
  const std::uint64_t t = trial_seed(cfg.master_seed, trial);
  return {t, derive_seed(t, 0), derive_seed(t, 1), derive_seed(t, 2)};
}

void check_converged(const Trajectory& traj) {
  if (traj.diverged)
    fail(ErrorCode::Divergence,
         "solver diverged at t=" + std::to_string(traj.diverged_at));
}

struct Estimate {
  Matrix beta;
  std::int64_t t;
};

const TrajectoryRecord& oracle_record(const Trajectory& traj, const Matrix& beta_star) {
  const TrajectoryRecord* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& rec : traj.records) {
    if (!(rec.beta.norm() > 1e-14)) continue;
    const double d = dist_metric(rec.beta, beta_star);
    if (d < best_dist) {
      best_dist = d;
      best = &rec;
    }
  }
  if (!best) fail(ErrorCode::ZeroNorm, "no nonzero iterate in trajectory");
  return *best;
}

SolverConfig truncated_run(SolverConfig cfg, std::int64_t t) {
  cfg.t_max = t;
  return cfg;
}

Estimate estimate_vector(const ExperimentConfig& cfg, const SimInstance& inst) {
  const Matrix beta_star = inst.beta_star;
  const auto& sel = cfg.selection;
  switch (sel.mode) {
    case SelectionSpec::Mode::Oracle: {
      const Trajectory traj = run_vector(build_moment(inst, cfg.robust), cfg.solver);
      check_converged(traj);
      const auto& rec = oracle_record(traj, beta_star);
      return {rec.beta, rec.t};
    }
    case SelectionSpec::Mode::Fixed: {
      const Trajectory traj =
          run_vector(build_moment(inst, cfg.robust), truncated_run(cfg.solver, sel.fixed_t));
      check_converged(traj);
      return {traj.records.back().beta, traj.records.back().t};
    }
    case SelectionSpec::Mode::OutOfSample: {
      auto [train, test] = split_half(inst);
      const Trajectory traj = run_vector(build_moment(train, cfg.robust), cfg.solver);
      check_converged(traj);
      SelectionOptions opts;
      opts.m = sel.m;
      opts.plateau_rel_tol = sel.plateau_rel_tol;
      opts.kernel.bandwidth_constant = sel.bandwidth_constant;
      const SelectionReport report = select_stopping_time(traj, train, test, opts);
      if (!sel.refit) return {traj.at_step(report.t_selected).beta, report.t_selected};
      const Trajectory full = run_vector(build_moment(inst, cfg.robust),
                                         truncated_run(cfg.solver, report.t_selected));
      check_converged(full);
      return {full.records.back().beta, report.t_selected};
    }
    case SelectionSpec::Mode::KnownLink: {
      auto [train, test] = split_half(inst);
      const Trajectory traj = run_vector(build_moment(train, cfg.robust), cfg.solver);
      check_converged(traj);
      const TrajectoryRecord* best = nullptr;
      double best_loss = std::numeric_limits<double>::infinity();
      for (const auto& rec : traj.records) {
        const double norm = rec.beta.norm();
        if (!(norm > 1e-14)) continue;
        const Vector z = test.covariates * (rec.beta.col(0) / norm);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          const double e = test.responses(i) - inst.link(z(i));
          loss += e * e;
        }
        loss /= static_cast<double>(std::max<Eigen::Index>(z.size(), 1));
        if (loss < best_loss) {
          best_loss = loss;
          best = &rec;
        }
      }
      if (!best) fail(ErrorCode::ZeroNorm, "no nonzero iterate in trajectory");
      return {best->beta, best->t};
    }
  }
  fail(ErrorCode::Config, "unknown selection mode");
}

Estimate estimate_matrix(const ExperimentConfig& cfg, const MatrixSimInstance& inst) {
  const auto& sel = cfg.selection;
  switch (sel.mode) {
    case SelectionSpec::Mode::Oracle: {
      const Trajectory traj = run_matrix(build_moment(inst, cfg.robust), cfg.solver);
      check_converged(traj);
      const auto& rec = oracle_record(traj, inst.beta_star);
      return {rec.beta, rec.t};
    }
    case SelectionSpec::Mode::Fixed: {
      const Trajectory traj =
          run_matrix(build_moment(inst, cfg.robust), truncated_run(cfg.solver, sel.fixed_t));
      check_converged(traj);
      return {traj.records.back().beta, traj.records.back().t};
    }
    case SelectionSpec::Mode::OutOfSample: {
      auto [train, test] = split_half(inst);
      const Trajectory traj = run_matrix(build_moment(train, cfg.robust), cfg.solver);
      check_converged(traj);
      SelectionOptions opts;
      opts.m = sel.m;
      opts.plateau_rel_tol = sel.plateau_rel_tol;
      opts.kernel.bandwidth_constant = sel.bandwidth_constant;
      const SelectionReport report = select_stopping_time(traj, train, test, opts);
      if (!sel.refit) return {traj.at_step(report.t_selected).beta, report.t_selected};
      const Trajectory full = run_matrix(build_moment(inst, cfg.robust),
                                         truncated_run(cfg.solver, report.t_selected));
      check_converged(full);
      return {full.records.back().beta, report.t_selected};
    }
    case SelectionSpec::Mode::KnownLink: break;
  }
  fail(ErrorCode::Config, "unsupported selection mode for matrix experiments");
}

Vector draw_beta(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return normalize_for_design(gen_sparse_beta(cfg.dim, cfg.sparsity, rng), cfg.design);
}

GenOptions gen_options(const ExperimentConfig& cfg) {
  GenOptions opts;
  opts.mu_star_samples = cfg.mu_star_samples;
  return opts;
}

/// Runs `body`, converting library errors into an error-coded row.
template <class Body>
void guarded(MetricsRow& row, Body&& body) {
  try {
    body();
  } catch (const Error& e) {
    row.error = to_string(e.code());
    row.selected_t.reset();
    row.dist.reset();
    row.fdr.reset();
    row.tpr.reset();
    row.rank.reset();
    row.risk.reset();
  }
}

std::vector<MetricsRow> run_task(const ExperimentConfig& cfg, int g, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const TrialSeeds seeds = seeds_for(cfg, trial);
  const double value = cfg.grid[static_cast<size_t>(g)];

  MetricsRow row;
  row.kind = cfg.kind;
  row.grid_index = g;
  row.grid_value = value;
  row.dim = cfg.dim;
  row.sparsity = cfg.sparsity;
  row.trial = trial;
  row.seed = seeds.trial;
  row.method = "implicit";
  std::vector<MetricsRow> rows;
  std::optional<MetricsRow> baseline_row;

  guarded(row, [&] {
    row.n = cfg.sample_size(value);
    if (cfg.kind == ExperimentKind::RateSweepMatrix) {
      Rng rng(seeds.beta);
      const Matrix beta = gen_lowrank_beta(cfg.dim, cfg.sparsity, rng);
      const MatrixSimInstance inst = gen_matrix_sim(beta, cfg.design, cfg.link, cfg.noise_sigma,
                                                    row.n, seeds.data, gen_options(cfg));
      const Estimate est = estimate_matrix(cfg, inst);
      row.selected_t = est.t;
      if (cfg.threshold_over_alpha)
        row.rank = numerical_rank(est.beta, *cfg.threshold_over_alpha * cfg.solver.alpha);
      row.dist = dist_metric(est.beta, inst.beta_star);
      return;
    }

    const Vector beta = draw_beta(cfg, seeds.beta);
    if (cfg.kind == ExperimentKind::PredictionRisk) {
      row.method = "oracle_kernel";
      const SimInstance train = gen_vector_sim(beta, cfg.design, cfg.link, cfg.noise_sigma,
                                               row.n, seeds.data, gen_options(cfg));
      const SimInstance test = gen_vector_sim(beta, cfg.design, cfg.link, cfg.noise_sigma,
                                              row.n, seeds.test, gen_options(cfg));
      KernelOptions kopts;
      kopts.bandwidth_constant = cfg.selection.bandwidth_constant;
      const KernelPredictor kp = fit_kernel(train, beta, kopts);
      row.risk = prediction_risk(kp, test, beta);
      return;
    }

    const SimInstance inst = gen_vector_sim(beta, cfg.design, cfg.link, cfg.noise_sigma, row.n,
                                            seeds.data, gen_options(cfg));
    if (cfg.baseline) {
      baseline_row = row;
      baseline_row->method = "lasso_cv";
      guarded(*baseline_row, [&] {
        const CvLasso lasso = l1_baseline_cv(inst, cfg.cv_folds, cfg.cv_grid);
        const auto sm = support_metrics(support_of(lasso.beta), inst.support, inst.p());
        baseline_row->fdr = sm.fdr;
        baseline_row->tpr = sm.tpr;
        baseline_row->dist = dist_metric(lasso.beta, inst.beta_star);
      });
    }
    const Estimate est = estimate_vector(cfg, inst);
    row.selected_t = est.t;
    if (cfg.threshold_over_alpha) {
      const Vector kept =
          threshold_vector(est.beta.col(0), *cfg.threshold_over_alpha * cfg.solver.alpha);
      const auto sm = support_metrics(support_of(kept), inst.support, inst.p());
      row.fdr = sm.fdr;
      row.tpr = sm.tpr;
    }
    row.dist = dist_metric(est.beta, inst.beta_star);
  });

  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  row.wall_ms = ms;
  rows.push_back(std::move(row));
  if (baseline_row) {
    baseline_row->wall_ms = ms;
    rows.push_back(std::move(*baseline_row));
  }
  return rows;
}

}  // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& input, int threads) {
  ExperimentConfig cfg = input;
  cfg.finalize();
  const int grid = static_cast<int>(cfg.grid.size());
  const int tasks = grid * cfg.trials;
  std::vector<std::vector<MetricsRow>> results(static_cast<size_t>(tasks));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < tasks; k = next++)
      results[static_cast<size_t>(k)] = run_task(cfg, k / cfg.trials, k % cfg.trials);
  };
  const int workers = std::clamp(threads, 1, std::max(tasks, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<MetricsRow> rows;
  for (auto& r : results)
    for (auto& row : r) rows.push_back(std::move(row));
  return rows;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config,
                                  const std::vector<MetricsRow>& rows) {
  struct Acc {
    SummaryRow row;
    double dist = 0, fdr = 0, tpr = 0, risk = 0, rank_hits = 0;
    int n_dist = 0, n_fdr = 0, n_tpr = 0, n_risk = 0, n_rank = 0;
  };
  std::map<std::pair<int, std::string>, Acc> groups;
  for (const auto& r : rows) {
    auto& acc = groups[{r.grid_index, r.method}];
    acc.row.grid_index = r.grid_index;
    acc.row.grid_value = r.grid_value;
    acc.row.n = r.n;
    acc.row.method = r.method;
    if (!r.error.empty()) {
      ++acc.row.failed_trials;
      continue;
    }
    ++acc.row.ok_trials;
    if (r.dist) acc.dist += *r.dist, ++acc.n_dist;
    if (r.fdr) acc.fdr += *r.fdr, ++acc.n_fdr;
    if (r.tpr) acc.tpr += *r.tpr, ++acc.n_tpr;
    if (r.risk) acc.risk += *r.risk, ++acc.n_risk;
    if (r.rank) acc.rank_hits += (*r.rank == config.sparsity), ++acc.n_rank;
  }
  std::vector<SummaryRow> out;
  for (auto& [key, acc] : groups) {
    if (acc.n_dist) acc.row.mean_dist = acc.dist / acc.n_dist;
    if (acc.n_fdr) acc.row.mean_fdr = acc.fdr / acc.n_fdr;
    if (acc.n_tpr) acc.row.mean_tpr = acc.tpr / acc.n_tpr;
    if (acc.n_risk) acc.row.mean_risk = acc.risk / acc.n_risk;
    if (acc.n_rank) acc.row.exact_rank_fraction = acc.rank_hits / acc.n_rank;
    out.push_back(acc.row);
  }
  return out;
}

}  // namespace impreg
