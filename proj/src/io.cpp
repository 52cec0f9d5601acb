#include "impreg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "impreg/error.hpp"

namespace impreg::io {

namespace {

constexpr const char* kDatasetFormat = "impreg-dataset";
constexpr const char* kTrajectoryFormat = "impreg-trajectory";

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::Config, what); }

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where + ": expected a JSON object");
}

/// Rejects keys outside `allowed` so typos surface as config errors.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  expect_object(j, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) config_error(where + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + ": bad value for '" + key + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key, where);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

json flat(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) out.push_back(m(i, k));
  return out;
}

json flat(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from(const json& j, Eigen::Index size, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    config_error(what + ": expected " + std::to_string(size) + " numbers");
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (!j[static_cast<size_t>(i)].is_number()) config_error(what + ": non-numeric entry");
    v(i) = j[static_cast<size_t>(i)].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, size_t offset,
                   const std::string& what) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& x = j[offset + static_cast<size_t>(i * cols + k)];
      if (!x.is_number()) config_error(what + ": non-numeric entry");
      m(i, k) = x.get<double>();
    }
  return m;
}

LinkSpec link_from(const json& j, const std::string& where) {
  if (!j.is_string()) config_error(where + ": link must be a name such as \"f1\"");
  try {
    return LinkSpec::from_name(j.get<std::string>());
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
}

std::string link_name(const LinkSpec& link) {
  require(link.kind() != LinkKind::Custom, ErrorCode::Unsupported,
          "custom links cannot be serialized");
  return link.name();
}

json metadata(const std::uint64_t seed, const LinkSpec& link, double sigma,
              const ScoreModel& design) {
  return {{"seed", seed},
          {"link", link_name(link)},
          {"noise_sigma", sigma},
          {"design", design_to_json(design)}};
}

json opt_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

// ------------------------------------------------------------------ design

json design_to_json(const ScoreModel& model) {
  if (model.is_gaussian_vector()) {
    json cov = json::array();
    const Matrix& c = model.covariance();
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < c.cols(); ++k) row.push_back(c(i, k));
      cov.push_back(row);
    }
    return {{"family", "GaussianVector"}, {"mean", flat(model.mean())}, {"covariance", cov}};
  }
  const auto& fam = model.family();
  if (std::holds_alternative<StandardGaussian>(fam)) return {{"family", "StandardGaussian"}};
  if (const auto* t = std::get_if<StudentT>(&fam)) return {{"family", "StudentT"}, {"dof", t->dof}};
  if (const auto* g = std::get_if<GammaFamily>(&fam))
    return {{"family", "Gamma"}, {"shape", g->shape}, {"scale", g->scale}};
  fail(ErrorCode::Unsupported, "custom designs cannot be serialized");
}

ScoreModel design_from_json(const json& j) {
  const std::string where = "design";
  if (j.is_string()) return design_from_json(json{{"family", j.get<std::string>()}});
  expect_object(j, where);
  const std::string family = get<std::string>(j, "family", where);
  try {
    if (family == "StandardGaussian") {
      check_keys(j, {"family"}, where);
      return ScoreModel::standard_gaussian();
    }
    if (family == "StudentT") {
      check_keys(j, {"family", "dof"}, where);
      return ScoreModel::student_t(get<double>(j, "dof", where));
    }
    if (family == "Gamma") {
      check_keys(j, {"family", "shape", "scale"}, where);
      return ScoreModel::gamma(get<double>(j, "shape", where), get<double>(j, "scale", where));
    }
    if (family == "GaussianVector") {
      check_keys(j, {"family", "mean", "covariance"}, where);
      const json& cov = j.at("covariance");
      if (!cov.is_array() || cov.empty()) config_error(where + ": covariance must be a matrix");
      const auto p = static_cast<Eigen::Index>(cov.size());
      Matrix c(p, p);
      for (Eigen::Index i = 0; i < p; ++i)
        c.row(i) = vector_from(cov[static_cast<size_t>(i)], p, where + ".covariance").transpose();
      const Vector mean = j.contains("mean") ? vector_from(j.at("mean"), p, where + ".mean")
                                             : Vector::Zero(p);
      return ScoreModel::gaussian(mean, c);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    config_error(where + ": " + e.what());
  }
  config_error(where + ": unknown family '" + family + "'");
}

// ----------------------------------------------------------------- dataset

json dataset_to_json(const Dataset& data) {
  if (const auto* v = std::get_if<SimInstance>(&data)) {
    json support = json::array();
    for (auto j : v->support) support.push_back(j);
    return {{"format", kDatasetFormat},
            {"version", 1},
            {"kind", "vector"},
            {"n", v->n()},
            {"p", v->p()},
            {"covariates", flat(v->covariates)},
            {"responses", flat(v->responses)},
            {"beta_star", flat(v->beta_star)},
            {"support", support},
            {"mu_star", opt_number(v->mu_star)},
            {"metadata", metadata(v->seed, v->link, v->noise_sigma, v->design)}};
  }
  const auto& m = std::get<MatrixSimInstance>(data);
  json cov = json::array();
  for (const auto& x : m.covariates)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index k = 0; k < x.cols(); ++k) cov.push_back(x(i, k));
  return {{"format", kDatasetFormat},
          {"version", 1},
          {"kind", "matrix"},
          {"n", m.n()},
          {"d", m.d()},
          {"covariates", cov},
          {"responses", flat(m.responses)},
          {"beta_star", flat(m.beta_star)},
          {"rank", m.rank},
          {"mu_star", opt_number(m.mu_star)},
          {"metadata", metadata(m.seed, m.link, m.noise_sigma, m.design)}};
}

Dataset dataset_from_json(const json& j) {
  const std::string where = "dataset";
  expect_object(j, where);
  if (get_or<std::string>(j, "format", "", where) != kDatasetFormat)
    config_error(where + ": not an impreg dataset");
  if (get<int>(j, "version", where) != 1) config_error(where + ": unsupported version");
  const std::string kind = get<std::string>(j, "kind", where);
  const auto n = get<Eigen::Index>(j, "n", where);
  if (n < 1) config_error(where + ": n must be positive");
  const json& meta = j.at("metadata");
  const auto seed = get<std::uint64_t>(meta, "seed", where + ".metadata");
  const LinkSpec link = link_from(meta.at("link"), where + ".metadata");
  const auto sigma = get<double>(meta, "noise_sigma", where + ".metadata");
  const ScoreModel design = design_from_json(meta.at("design"));
  const json& cov = j.at("covariates");

  if (kind == "vector") {
    const auto p = get<Eigen::Index>(j, "p", where);
    if (p < 1) config_error(where + ": p must be positive");
    if (!cov.is_array() || static_cast<Eigen::Index>(cov.size()) != n * p)
      config_error(where + ": covariates must hold n*p numbers");
    SimInstance inst;
    inst.covariates = matrix_from(cov, n, p, 0, where + ".covariates");
    inst.responses = vector_from(j.at("responses"), n, where + ".responses");
    inst.beta_star = vector_from(j.at("beta_star"), p, where + ".beta_star");
    for (const auto& s : j.at("support")) inst.support.push_back(s.get<Eigen::Index>());
    inst.mu_star = opt_from(j, "mu_star");
    inst.link = link;
    inst.design = design;
    inst.noise_sigma = sigma;
    inst.seed = seed;
    return inst;
  }
  if (kind == "matrix") {
    const auto d = get<Eigen::Index>(j, "d", where);
    if (d < 1) config_error(where + ": d must be positive");
    if (!cov.is_array() || static_cast<Eigen::Index>(cov.size()) != n * d * d)
      config_error(where + ": covariates must hold n*d*d numbers");
    MatrixSimInstance inst;
    for (Eigen::Index i = 0; i < n; ++i)
      inst.covariates.push_back(
          matrix_from(cov, d, d, static_cast<size_t>(i * d * d), where + ".covariates"));
    inst.responses = vector_from(j.at("responses"), n, where + ".responses");
    const json& b = j.at("beta_star");
    if (!b.is_array() || static_cast<Eigen::Index>(b.size()) != d * d)
      config_error(where + ": beta_star must hold d*d numbers");
    inst.beta_star = matrix_from(b, d, d, 0, where + ".beta_star");
    inst.rank = get<int>(j, "rank", where);
    inst.mu_star = opt_from(j, "mu_star");
    inst.link = link;
    inst.design = design;
    inst.noise_sigma = sigma;
    inst.seed = seed;
    return inst;
  }
  config_error(where + ": kind must be \"vector\" or \"matrix\"");
}

// --------------------------------------------------------------------- csv

std::string format_double(double x) {
  char buf[40];
  if (x == 0.0) x = 0.0;  // no "-0"
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string cell(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  const bool has_dist = std::any_of(traj.records.begin(), traj.records.end(),
                                    [](const auto& r) { return r.dist_sq.has_value(); });
  const bool has_off = std::any_of(traj.records.begin(), traj.records.end(),
                                   [](const auto& r) { return r.max_off_support.has_value(); });
  std::ostringstream out;
  out << "t,loss";
  if (has_dist) out << ",dist_sq";
  if (has_off) out << ",max_off_support";
  out << '\n';
  for (const auto& r : traj.records) {
    out << r.t << ',' << format_double(r.loss);
    if (has_dist) out << ',' << cell(r.dist_sq);
    if (has_off) out << ',' << cell(r.max_off_support);
    out << '\n';
  }
  return out.str();
}

std::string selection_csv(const SelectionReport& report) {
  std::ostringstream out;
  out << "candidate_t,train_loss,test_risk,selected\n";
  for (const auto& c : report.candidates)
    out << c.t << ',' << format_double(c.train_loss) << ',' << format_double(c.test_risk) << ','
        << (c.t == report.t_selected ? 1 : 0) << '\n';
  return out.str();
}

std::string metrics_csv(const std::vector<MetricsRow>& rows, bool wall_time) {
  std::ostringstream out;
  out << "#schema=v1\n";
  out << "kind,grid_index,grid_value,n,dim,sparsity,trial,seed,method,selected_t,dist,fdr,tpr,"
         "rank,risk,error";
  if (wall_time) out << ",wall_ms";
  out << '\n';
  for (const auto& r : rows) {
    out << to_string(r.kind) << ',' << r.grid_index << ',' << format_double(r.grid_value) << ','
        << r.n << ',' << r.dim << ',' << r.sparsity << ',' << r.trial << ',' << r.seed << ','
        << r.method << ',';
    if (r.selected_t) out << *r.selected_t;
    out << ',' << cell(r.dist) << ',' << cell(r.fdr) << ',' << cell(r.tpr) << ',';
    if (r.rank) out << *r.rank;
    out << ',' << cell(r.risk) << ',' << r.error;
    if (wall_time) out << ',' << format_double(r.wall_ms);
    out << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "#schema=v1\n";
  out << "grid_index,grid_value,n,method,ok_trials,failed_trials,mean_dist,mean_fdr,mean_tpr,"
         "mean_risk,exact_rank_fraction\n";
  for (const auto& r : rows)
    out << r.grid_index << ',' << format_double(r.grid_value) << ',' << r.n << ',' << r.method
        << ',' << r.ok_trials << ',' << r.failed_trials << ',' << cell(r.mean_dist) << ','
        << cell(r.mean_fdr) << ',' << cell(r.mean_tpr) << ',' << cell(r.mean_risk) << ','
        << cell(r.exact_rank_fraction) << '\n';
  return out.str();
}

// -------------------------------------------------------------- trajectory

json trajectory_to_json(const Trajectory& traj, std::int64_t n_fit) {
  json records = json::array();
  for (const auto& r : traj.records)
    records.push_back({{"t", r.t},
                       {"loss", r.loss},
                       {"dist_sq", opt_number(r.dist_sq)},
                       {"max_off_support", opt_number(r.max_off_support)},
                       {"beta", flat(r.beta)}});
  const bool vec = traj.kind == TrajectoryKind::Vector;
  const Eigen::Index dim = traj.records.empty() ? 0 : traj.records.front().beta.rows();
  return {{"format", kTrajectoryFormat},
          {"version", 1},
          {"kind", vec ? "vector" : "matrix"},
          {"dim", dim},
          {"n_fit", n_fit},
          {"solver",
           {{"alpha", traj.config.alpha},
            {"eta", traj.config.eta},
            {"t_max", traj.config.t_max},
            {"record_stride", traj.config.record_stride}}},
          {"diverged", traj.diverged},
          {"diverged_at", traj.diverged_at},
          {"records", records}};
}

Trajectory trajectory_from_json(const json& j, std::int64_t* n_fit) {
  const std::string where = "trajectory";
  expect_object(j, where);
  if (get_or<std::string>(j, "format", "", where) != kTrajectoryFormat)
    config_error(where + ": not an impreg trajectory");
  if (get<int>(j, "version", where) != 1) config_error(where + ": unsupported version");
  Trajectory traj;
  const std::string kind = get<std::string>(j, "kind", where);
  if (kind != "vector" && kind != "matrix") config_error(where + ": bad kind");
  traj.kind = kind == "vector" ? TrajectoryKind::Vector : TrajectoryKind::Matrix;
  const auto dim = get<Eigen::Index>(j, "dim", where);
  const json& s = j.at("solver");
  traj.config.alpha = get<double>(s, "alpha", where);
  traj.config.eta = get<double>(s, "eta", where);
  traj.config.t_max = get<std::int64_t>(s, "t_max", where);
  traj.config.record_stride = get<std::int64_t>(s, "record_stride", where);
  traj.diverged = get<bool>(j, "diverged", where);
  traj.diverged_at = get<std::int64_t>(j, "diverged_at", where);
  if (n_fit) *n_fit = get<std::int64_t>(j, "n_fit", where);
  const Eigen::Index cols = traj.kind == TrajectoryKind::Vector ? 1 : dim;
  for (const auto& r : j.at("records")) {
    TrajectoryRecord rec;
    rec.t = get<std::int64_t>(r, "t", where);
    rec.loss = get<double>(r, "loss", where);
    rec.dist_sq = opt_from(r, "dist_sq");
    rec.max_off_support = opt_from(r, "max_off_support");
    const json& b = r.at("beta");
    if (!b.is_array() || static_cast<Eigen::Index>(b.size()) != dim * cols)
      config_error(where + ": beta snapshot has the wrong size");
    rec.beta = matrix_from(b, dim, cols, 0, where + ".beta");
    traj.records.push_back(std::move(rec));
  }
  if (traj.records.empty()) config_error(where + ": no records");
  return traj;
}

// ----------------------------------------------------------------- configs

namespace {

SolverConfig solver_from(const json& j, SolverConfig base) {
  const std::string where = "solver";
  check_keys(j, {"alpha", "eta", "t_max", "record_stride"}, where);
  base.alpha = get_or<double>(j, "alpha", base.alpha, where);
  base.eta = get_or<double>(j, "eta", base.eta, where);
  base.t_max = get_or<std::int64_t>(j, "t_max", base.t_max, where);
  base.record_stride = get_or<std::int64_t>(j, "record_stride", base.record_stride, where);
  try {
    base.validate();
  } catch (const Error& e) {
    config_error(std::string("solver: ") + e.what());
  }
  return base;
}

RobustSpec robust_from(const json& j) {
  const std::string where = "robust";
  RobustSpec spec;
  if (j.is_null()) return spec;
  if (j.is_string()) return robust_from(json{{"mode", j.get<std::string>()}});
  check_keys(j, {"mode", "rule", "value", "fourth_moment"}, where);
  const std::string mode = lower(get_or<std::string>(j, "mode", "none", where));
  if (mode == "none") spec.mode = RobustSpec::Mode::None;
  else if (mode == "truncate") spec.mode = RobustSpec::Mode::Truncate;
  else if (mode == "shrink") spec.mode = RobustSpec::Mode::Shrink;
  else config_error(where + ": mode must be none, truncate or shrink");
  const std::string rule = lower(get_or<std::string>(j, "rule", "simulation", where));
  if (rule == "simulation") spec.rule = RobustSpec::Rule::Simulation;
  else if (rule == "theory") spec.rule = RobustSpec::Rule::Theory;
  else if (rule == "fixed") spec.rule = RobustSpec::Rule::Fixed;
  else config_error(where + ": rule must be simulation, theory or fixed");
  if (j.contains("value")) spec.value = get<double>(j, "value", where);
  if (j.contains("fourth_moment")) spec.fourth_moment = get<double>(j, "fourth_moment", where);
  if (spec.rule == RobustSpec::Rule::Fixed && !(spec.value && *spec.value > 0.0))
    config_error(where + ": fixed rule needs a positive value");
  if (spec.fourth_moment && !(*spec.fourth_moment > 0.0))
    config_error(where + ": fourth_moment must be positive");
  return spec;
}

Eigen::Index first_of(const json& j, std::initializer_list<const char*> keys, const char* what,
                      const std::string& where) {
  for (const char* k : keys)
    if (j.contains(k)) return get<Eigen::Index>(j, k, where);
  config_error(where + ": missing " + what);
}

}  // namespace

SimulateConfig simulate_config_from_json(const json& j) {
  const std::string where = "simulate config";
  check_keys(j, {"kind", "design", "link", "noise_sigma", "n", "p", "d", "s", "r", "seed",
                 "mu_star_samples"},
             where);
  SimulateConfig c;
  const std::string kind = lower(get_or<std::string>(j, "kind", "vector", where));
  if (kind != "vector" && kind != "matrix") config_error(where + ": kind must be vector or matrix");
  c.matrix = kind == "matrix";
  if (j.contains("design")) c.design = design_from_json(j.at("design"));
  if (j.contains("link")) c.link = link_from(j.at("link"), where);
  c.noise_sigma = get_or<double>(j, "noise_sigma", 0.5, where);
  c.n = get<Eigen::Index>(j, "n", where);
  c.dim = c.matrix ? first_of(j, {"d"}, "d", where) : first_of(j, {"p"}, "p", where);
  c.sparsity = c.matrix ? first_of(j, {"r"}, "r", where) : first_of(j, {"s"}, "s", where);
  c.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  c.mu_star_samples = get_or<int>(j, "mu_star_samples", 100000, where);
  if (c.n < 1 || c.dim < 1 || c.sparsity < 1 || c.sparsity > c.dim)
    config_error(where + ": need n >= 1 and 1 <= sparsity <= dimension");
  if (!(c.noise_sigma >= 0.0)) config_error(where + ": noise_sigma must be >= 0");
  if (c.mu_star_samples < 0) config_error(where + ": mu_star_samples must be >= 0");
  return c;
}

Dataset simulate(const SimulateConfig& c) {
  GenOptions opts;
  opts.mu_star_samples = c.mu_star_samples;
  Rng rng(derive_seed(c.seed, 0));
  const std::uint64_t data_seed = derive_seed(c.seed, 1);
  if (c.matrix) {
    const Matrix beta = gen_lowrank_beta(c.dim, c.sparsity, rng);
    auto inst = gen_matrix_sim(beta, c.design, c.link, c.noise_sigma, c.n, data_seed, opts);
    inst.seed = c.seed;
    return inst;
  }
  const Vector beta = normalize_for_design(gen_sparse_beta(c.dim, c.sparsity, rng), c.design);
  auto inst = gen_vector_sim(beta, c.design, c.link, c.noise_sigma, c.n, data_seed, opts);
  inst.seed = c.seed;
  return inst;
}

FitConfig fit_config_from_json(const json& j, bool matrix) {
  const std::string where = "fit config";
  FitConfig c;
  c.solver = matrix ? SolverConfig::matrix_defaults() : SolverConfig::vector_defaults();
  if (j.is_null()) return c;
  check_keys(j, {"solver", "robust"}, where);
  if (j.contains("solver")) c.solver = solver_from(j.at("solver"), c.solver);
  if (j.contains("robust")) c.robust = robust_from(j.at("robust"));
  if (matrix && c.robust.mode == RobustSpec::Mode::Truncate)
    config_error(where + ": truncation applies to vector data");
  if (!matrix && c.robust.mode == RobustSpec::Mode::Shrink)
    config_error(where + ": spectral shrinkage applies to matrix data");
  return c;
}

MomentEstimate fit_moment(const Dataset& data, const RobustSpec& robust) {
  return std::visit([&](const auto& inst) { return build_moment(inst, robust); }, data);
}

Trajectory fit(const Dataset& data, const FitConfig& config) {
  if (const auto* v = std::get_if<SimInstance>(&data)) {
    RunTruth truth{Matrix(v->beta_star), v->mu_star, v->support};
    return run_vector(build_moment(*v, config.robust), config.solver, truth);
  }
  const auto& m = std::get<MatrixSimInstance>(data);
  RunTruth truth{m.beta_star, m.mu_star, {}};
  return run_matrix(build_moment(m, config.robust), config.solver, truth);
}

SelectionOptions selection_options_from_json(const json& j) {
  const std::string where = "predict config";
  SelectionOptions o;
  if (j.is_null()) return o;
  check_keys(j, {"m", "plateau_rel_tol", "bandwidth_constant", "h", "radius"}, where);
  o.m = get_or<int>(j, "m", o.m, where);
  o.plateau_rel_tol = get_or<double>(j, "plateau_rel_tol", o.plateau_rel_tol, where);
  o.kernel.bandwidth_constant =
      get_or<double>(j, "bandwidth_constant", o.kernel.bandwidth_constant, where);
  if (j.contains("h")) o.kernel.h = get<double>(j, "h", where);
  if (j.contains("radius")) o.kernel.radius = get<double>(j, "radius", where);
  if (o.m < 1) config_error(where + ": m must be >= 1");
  if (!(o.plateau_rel_tol > 0.0)) config_error(where + ": plateau_rel_tol must be positive");
  if (!(o.kernel.bandwidth_constant > 0.0))
    config_error(where + ": bandwidth_constant must be positive");
  return o;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  const std::string where = "experiment config";
  check_keys(j, {"kind", "design", "link", "noise_sigma", "p", "d", "dim", "s", "r", "sparsity",
                 "grid", "grid_unit", "trials", "solver", "robust", "selection",
                 "threshold_over_alpha", "baseline", "cv_folds", "cv_grid", "mu_star_samples",
                 "master_seed", "seed", "record_wall_time"},
             where);
  ExperimentConfig c;
  const std::string kind = get<std::string>(j, "kind", where);
  static const std::pair<const char*, ExperimentKind> kinds[] = {
      {"Trajectory", ExperimentKind::Trajectory},
      {"RateSweepVector", ExperimentKind::RateSweepVector},
      {"RateSweepMatrix", ExperimentKind::RateSweepMatrix},
      {"SupportRecovery", ExperimentKind::SupportRecovery},
      {"OneBit", ExperimentKind::OneBit},
      {"PredictionRisk", ExperimentKind::PredictionRisk}};
  bool known = false;
  for (const auto& [name, k] : kinds)
    if (lower(kind) == lower(name)) c.kind = k, known = true;
  if (!known) config_error(where + ": unknown kind '" + kind + "'");

  if (j.contains("design")) c.design = design_from_json(j.at("design"));
  if (j.contains("link")) c.link = link_from(j.at("link"), where);
  else if (c.kind == ExperimentKind::OneBit) c.link = LinkSpec(LinkKind::Sign);
  c.noise_sigma = get_or<double>(j, "noise_sigma", c.noise_sigma, where);
  c.dim = first_of(j, {"dim", "p", "d"}, "dimension (p or d)", where);
  c.sparsity = first_of(j, {"sparsity", "s", "r"}, "sparsity (s or r)", where);
  c.grid = get_or<std::vector<double>>(j, "grid", {}, where);
  if (j.contains("grid") && c.grid.empty()) config_error(where + ": grid must be nonempty");
  if (j.contains("grid_unit")) {
    const std::string unit = lower(get<std::string>(j, "grid_unit", where));
    if (unit == "n") c.grid_unit = GridUnit::SampleSize;
    else if (unit == "rate") c.grid_unit = GridUnit::Rate;
    else if (unit == "per_s_log_p") c.grid_unit = GridUnit::PerSLogP;
    else config_error(where + ": grid_unit must be n, rate or per_s_log_p");
  } else if (!c.grid.empty()) {
    switch (c.kind) {
      case ExperimentKind::RateSweepVector:
      case ExperimentKind::RateSweepMatrix: c.grid_unit = GridUnit::Rate; break;
      case ExperimentKind::SupportRecovery:
      case ExperimentKind::OneBit: c.grid_unit = GridUnit::PerSLogP; break;
      default: c.grid_unit = GridUnit::SampleSize; break;
    }
  }
  c.trials = get_or<int>(j, "trials", 1, where);
  const SolverConfig base =
      c.is_matrix() ? SolverConfig::matrix_defaults() : SolverConfig::vector_defaults();
  c.solver = j.contains("solver") ? solver_from(j.at("solver"), base) : base;
  if (j.contains("robust")) c.robust = robust_from(j.at("robust"));

  if (c.kind == ExperimentKind::OneBit) c.selection.mode = SelectionSpec::Mode::KnownLink;
  if (j.contains("selection")) {
    const json& s = j.at("selection");
    const std::string sw = where + ".selection";
    check_keys(s, {"mode", "m", "plateau_rel_tol", "bandwidth_constant", "refit", "t"}, sw);
    if (s.contains("mode")) {
      const std::string mode = lower(get<std::string>(s, "mode", sw));
      if (mode == "oracle") c.selection.mode = SelectionSpec::Mode::Oracle;
      else if (mode == "out_of_sample") c.selection.mode = SelectionSpec::Mode::OutOfSample;
      else if (mode == "fixed") c.selection.mode = SelectionSpec::Mode::Fixed;
      else if (mode == "known_link") c.selection.mode = SelectionSpec::Mode::KnownLink;
      else config_error(sw + ": mode must be oracle, out_of_sample, fixed or known_link");
    }
    c.selection.m = get_or<int>(s, "m", c.selection.m, sw);
    c.selection.plateau_rel_tol = get_or<double>(s, "plateau_rel_tol", c.selection.plateau_rel_tol, sw);
    c.selection.bandwidth_constant =
        get_or<double>(s, "bandwidth_constant", c.selection.bandwidth_constant, sw);
    c.selection.refit = get_or<bool>(s, "refit", c.selection.refit, sw);
    c.selection.fixed_t = get_or<std::int64_t>(s, "t", c.selection.fixed_t, sw);
    if (c.selection.mode == SelectionSpec::Mode::Fixed && !s.contains("t"))
      config_error(sw + ": fixed mode needs t");
    if (c.selection.m < 1 || c.selection.fixed_t < 0 || !(c.selection.plateau_rel_tol > 0.0) ||
        !(c.selection.bandwidth_constant > 0.0))
      config_error(sw + ": bad selection parameters");
  }
  if (j.contains("threshold_over_alpha"))
    c.threshold_over_alpha = get<double>(j, "threshold_over_alpha", where);
  c.baseline = get_or<bool>(j, "baseline", c.baseline, where);
  c.cv_folds = get_or<int>(j, "cv_folds", c.cv_folds, where);
  c.cv_grid = get_or<int>(j, "cv_grid", c.cv_grid, where);
  c.mu_star_samples = get_or<int>(j, "mu_star_samples", c.mu_star_samples, where);
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", get_or<std::uint64_t>(j, "seed", 0, where), where);
  c.record_wall_time = get_or<bool>(j, "record_wall_time", false, where);
  try {
    c.finalize();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    config_error(where + ": " + e.what());
  }
  return c;
}

// -------------------------------------------------------------------- files

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << contents;
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace impreg::io
