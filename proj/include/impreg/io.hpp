#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "impreg/bench.hpp"
#include "impreg/optim.hpp"
#include "impreg/select.hpp"
#include "impreg/simgen.hpp"

namespace impreg::io {

using json = nlohmann::json;

using Dataset = std::variant<SimInstance, MatrixSimInstance>;

/// {"family": "StandardGaussian"} | {"family": "StudentT", "dof": v}
/// | {"family": "Gamma", "shape": k, "scale": theta}
/// | {"family": "GaussianVector", "mean": [...], "covariance": [[...], ...]}
json design_to_json(const ScoreModel& model);
ScoreModel design_from_json(const json& j);

json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const json& j);

/// Fixed-precision number formatting used by every CSV writer.
std::string format_double(double x);

std::string trajectory_csv(const Trajectory& traj);

/// Full trajectory including beta snapshots; `n_fit` is the number of
/// observations the solver saw.
json trajectory_to_json(const Trajectory& traj, std::int64_t n_fit);
Trajectory trajectory_from_json(const json& j, std::int64_t* n_fit = nullptr);

std::string selection_csv(const SelectionReport& report);
std::string metrics_csv(const std::vector<MetricsRow>& rows, bool wall_time);
std::string summary_csv(const std::vector<SummaryRow>& rows);

struct SimulateConfig {
  bool matrix = false;
  ScoreModel design = ScoreModel::standard_gaussian();
  LinkSpec link;
  double noise_sigma = 0.5;
  Eigen::Index n = 0;
  Eigen::Index dim = 0;
  Eigen::Index sparsity = 1;
  std::uint64_t seed = 0;
  int mu_star_samples = 100000;
};

SimulateConfig simulate_config_from_json(const json& j);
Dataset simulate(const SimulateConfig& config);

struct FitConfig {
  SolverConfig solver;
  RobustSpec robust;
};

FitConfig fit_config_from_json(const json& j, bool matrix);
MomentEstimate fit_moment(const Dataset& data, const RobustSpec& robust);
Trajectory fit(const Dataset& data, const FitConfig& config);

SelectionOptions selection_options_from_json(const json& j);

ExperimentConfig experiment_config_from_json(const json& j);

json parse(const std::string& text);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace impreg::io
