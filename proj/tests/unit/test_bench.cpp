#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "impreg/bench.hpp"
#include "impreg/error.hpp"
#include "impreg/io.hpp"

using namespace impreg;
using testutil::max_abs;

namespace {

double l1_objective(const Vector& b, const Vector& phi, double lambda) {
  return b.dot(b) - 2 * b.dot(phi) + lambda * b.lpNorm<1>();
}

ExperimentConfig small_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.link = LinkSpec(LinkKind::F1);
  c.dim = 60;
  c.sparsity = 3;
  c.trials = 3;
  c.grid = {0.3, 0.4};
  c.grid_unit = GridUnit::Rate;
  c.solver = {1e-5, 0.01, 1500, 10};
  c.master_seed = 17;
  return c;
}

}  // namespace

TEST_CASE("dist metric examples") {
  Rng rng(1);
  const Vector b = gen_sparse_beta(8, 3, rng);
  CHECK(dist_metric(Matrix(b), Matrix(b)) <= 1e-15);
  CHECK(dist_metric(Matrix(-b), Matrix(b)) <= 1e-15);
  CHECK(dist_metric(Matrix(3.7 * b), Matrix(b)) <= 1e-15);
  Vector e1 = Vector::Zero(2), e2 = Vector::Zero(2);
  e1(0) = 1, e2(1) = 1;
  CHECK(dist_metric(Matrix(e1), Matrix(e2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(dist_metric(Matrix::Zero(2, 1), Matrix(e2)), Error);
  CHECK_THROWS_AS(dist_metric(Matrix(e1), Matrix::Ones(3, 1)), Error);
  const Vector x = testutil::random_vector(8, rng);
  CHECK(dist_metric(Matrix(x), Matrix(b)) == doctest::Approx(dist_metric(Matrix(-0.01 * x), Matrix(b))).epsilon(1e-12));
}

TEST_CASE("support metrics examples") {
  const auto exact = support_metrics({1, 4}, {1, 4}, 10);
  CHECK(exact.fdr == 0.0);
  CHECK(exact.tpr == 1.0);
  const auto empty = support_metrics({}, {2}, 10);
  CHECK(empty.fdr == 0.0);
  CHECK(empty.tpr == 0.0);
  const auto half = support_metrics({1, 2}, {1}, 10);
  CHECK(half.fdr == 0.5);
  CHECK(half.tpr == 1.0);
  CHECK_THROWS_AS(support_metrics({10}, {1}, 10), Error);
  CHECK_THROWS_AS(support_metrics({-1}, {1}, 10), Error);
}

TEST_CASE("l1 baseline examples") {
  Vector phi(2);
  phi << 1.0, -0.2;
  CHECK((l1_baseline(phi, 0).array() == phi.array()).all());
  CHECK(l1_baseline(phi, 2.0).isZero(0.0));
  const Vector b = l1_baseline(phi, 0.8);
  CHECK(b(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(b(1) == 0.0);
  // KKT: 2(b - phi) + lambda * g = 0 with g in the subdifferential.
  CHECK(std::abs(2 * (b(0) - phi(0)) + 0.8) <= 1e-15);
  CHECK(std::abs(2 * (0 - phi(1))) <= 0.8);
  // 1-D grid oracle per coordinate.
  for (int j = 0; j < 2; ++j) {
    double best = INFINITY, arg = 0;
    for (int k = -20000; k <= 20000; ++k) {
      const double x = k * 1e-4;
      const double f = x * x - 2 * x * phi(j) + 0.8 * std::abs(x);
      if (f < best) best = f, arg = x;
    }
    CHECK(std::abs(arg - b(j)) <= 1e-4);
  }
  CHECK_THROWS_AS(l1_baseline(phi, -1), Error);
}

TEST_CASE("l1 baseline beats random perturbations") {
  Rng rng(5);
  const Vector phi = testutil::random_vector(20, rng);
  const double lambda = 0.7;
  const Vector b = l1_baseline(phi, lambda);
  const double f0 = l1_objective(b, phi, lambda);
  for (int k = 0; k < 10000; ++k) {
    const Vector pert = b + testutil::random_vector(20, rng) * (k % 2 ? 1e-3 : 0.3);
    CHECK(l1_objective(pert, phi, lambda) >= f0);
  }
}

TEST_CASE("cross-validated l1 baseline") {
  Rng rng(6);
  const Vector beta = gen_sparse_beta(50, 3, rng);
  const auto inst = gen_vector_sim(beta, ScoreModel::standard_gaussian(), LinkSpec(LinkKind::F2), 0.5, 400, 7);
  const auto cv = l1_baseline_cv(inst);
  REQUIRE(cv.lambdas.size() == 20);
  const double linf = plain_moment(inst, inst.design).vector().lpNorm<Eigen::Infinity>();
  CHECK(cv.lambdas.front() == doctest::Approx(0.01 * linf).epsilon(1e-12));
  CHECK(cv.lambdas.back() == doctest::Approx(2 * linf).epsilon(1e-12));
  const auto best = std::min_element(cv.cv_losses.begin(), cv.cv_losses.end());
  CHECK(cv.lambda == cv.lambdas[static_cast<size_t>(best - cv.cv_losses.begin())]);
  CHECK(max_abs(cv.beta - l1_baseline(plain_moment(inst, inst.design).vector(), cv.lambda)) <= 1e-12);
  CHECK(support_metrics(support_of(cv.beta), inst.support, 50).tpr == 1.0);
}

TEST_CASE("fit_line recovers an exact line") {
  const auto fit = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), Error);
}

TEST_CASE("sample sizes from grid units") {
  ExperimentConfig c = small_config(ExperimentKind::RateSweepVector);
  c.dim = 500;
  c.sparsity = 4;
  CHECK(c.sample_size(0.25) == static_cast<Eigen::Index>(std::ceil(4 * std::log(500.0) / 0.0625)));
  c.grid_unit = GridUnit::PerSLogP;
  CHECK(c.sample_size(10) == static_cast<Eigen::Index>(std::ceil(40 * std::log(500.0))));
  c.kind = ExperimentKind::RateSweepMatrix;
  c.dim = 25;
  c.sparsity = 3;
  c.grid_unit = GridUnit::Rate;
  CHECK(c.sample_size(0.2) == static_cast<Eigen::Index>(std::ceil(75 * std::log(25.0) / 0.04)));
}

TEST_CASE("default grids") {
  ExperimentConfig v = small_config(ExperimentKind::RateSweepVector);
  v.grid.clear();
  v.finalize();
  REQUIRE(v.grid.size() == 8);
  CHECK(v.grid.front() == 0.25);
  CHECK(v.grid.back() == doctest::Approx(0.4));
  ExperimentConfig m = small_config(ExperimentKind::RateSweepMatrix);
  m.grid.clear();
  m.dim = 10;
  m.finalize();
  CHECK(m.grid.front() == 0.15);
  CHECK(m.grid.back() == doctest::Approx(0.35));
}

TEST_CASE("experiments are deterministic and thread-count invariant") {
  const auto cfg = small_config(ExperimentKind::RateSweepVector);
  const auto a = io::metrics_csv(run_experiment(cfg, 1), false);
  const auto b = io::metrics_csv(run_experiment(cfg, 1), false);
  const auto c = io::metrics_csv(run_experiment(cfg, 3), false);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.rfind("#schema=v1\n", 0) == 0);

  const auto rows = run_experiment(cfg, 2);
  REQUIRE(rows.size() == 6);
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].grid_index == static_cast<int>(k / 3));
    CHECK(rows[k].trial == static_cast<int>(k % 3));
    CHECK(rows[k].error.empty());
    CHECK(rows[k].seed == trial_seed(cfg.master_seed, rows[k].trial));
  }
  CHECK(rows[0].seed != rows[1].seed);
}

TEST_CASE("errors become coded rows") {
  auto cfg = small_config(ExperimentKind::Trajectory);
  cfg.grid = {100};
  cfg.grid_unit = GridUnit::SampleSize;
  cfg.trials = 1;
  cfg.solver.t_max = 0;
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error == "zero_norm");
  CHECK_FALSE(rows[0].dist.has_value());

  auto hot = small_config(ExperimentKind::RateSweepVector);
  hot.solver = {1.0, 5.0, 50, 1};
  hot.trials = 1;
  for (const auto& r : run_experiment(hot)) CHECK(r.error == "divergence");
}

TEST_CASE("support recovery rows carry both methods") {
  auto cfg = small_config(ExperimentKind::SupportRecovery);
  cfg.grid = {10};
  cfg.grid_unit = GridUnit::PerSLogP;
  cfg.link = LinkSpec(LinkKind::F2);
  cfg.trials = 2;
  cfg.solver.t_max = 3000;
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "implicit");
  CHECK(rows[1].method == "lasso_cv");
  for (const auto& r : rows) {
    REQUIRE(r.fdr.has_value());
    CHECK(*r.fdr >= 0.0);
    CHECK(*r.fdr <= 1.0);
    CHECK(*r.tpr >= 0.0);
    CHECK(*r.tpr <= 1.0);
  }
  const auto summary = summarize(cfg, rows);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].ok_trials == 2);
}

TEST_CASE("other experiment kinds run") {
  auto one = small_config(ExperimentKind::OneBit);
  one.link = LinkSpec(LinkKind::Sign);
  one.grid = {5};
  one.grid_unit = GridUnit::PerSLogP;
  one.solver.t_max = 3000;
  for (const auto& r : run_experiment(one)) {
    CHECK(r.error.empty());
    CHECK(r.dist.has_value());
  }

  auto risk = small_config(ExperimentKind::PredictionRisk);
  risk.link = LinkSpec();
  risk.noise_sigma = 0.0;
  risk.grid = {200};
  risk.grid_unit = GridUnit::SampleSize;
  for (const auto& r : run_experiment(risk)) {
    CHECK(r.method == "oracle_kernel");
    CHECK(*r.risk >= 0.0);
  }

  auto mat = small_config(ExperimentKind::RateSweepMatrix);
  mat.dim = 6;
  mat.sparsity = 2;
  mat.link = LinkSpec(LinkKind::F5);
  mat.solver = SolverConfig::matrix_defaults();
  mat.solver.t_max = 2000;
  mat.threshold_over_alpha = 5.0;
  mat.robust.mode = RobustSpec::Mode::Shrink;
  mat.trials = 1;
  for (const auto& r : run_experiment(mat)) {
    CHECK(r.error.empty());
    CHECK(r.rank.has_value());
  }
}

TEST_CASE("experiment config validation") {
  auto c = small_config(ExperimentKind::RateSweepVector);
  c.trials = 0;
  CHECK_THROWS_AS(c.finalize(), Error);
  c = small_config(ExperimentKind::RateSweepVector);
  c.sparsity = 100;
  CHECK_THROWS_AS(c.finalize(), Error);
  c = small_config(ExperimentKind::OneBit);
  CHECK_THROWS_AS(c.finalize(), Error);
  c = small_config(ExperimentKind::RateSweepVector);
  c.robust.mode = RobustSpec::Mode::Shrink;
  CHECK_THROWS_AS(c.finalize(), Error);
}
