#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "impreg/impreg.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  std::string data;
  std::string trajectory;
  std::string summary;
  bool train_half = false;
};

struct Failure {
  impreg_status status;
  std::string message;
};

int exit_code(impreg_status st) {
  switch (st) {
    case IMPREG_OK: return 0;
    case IMPREG_ERR_DIVERGENCE: return 3;
    case IMPREG_ERR_CONFIG:
    case IMPREG_ERR_INVALID_ARGUMENT:
    case IMPREG_ERR_IO: return 2;
    default: return 1;
  }
}

void check(impreg_status st) {
  if (st != IMPREG_OK) throw Failure{st, impreg_last_error()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{IMPREG_ERR_IO, "cannot open '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{IMPREG_ERR_IO, "cannot write '" + path + "'"};
}

/// Owns a string handed out by the library.
struct Text {
  char* p = nullptr;
  ~Text() { impreg_string_free(p); }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};

using Dataset = Handle<impreg_dataset, impreg_dataset_free>;
using Trajectory = Handle<impreg_trajectory, impreg_trajectory_free>;

std::string config_text(const Options& o) { return o.config.empty() ? "" : slurp(o.config); }

void run_simulate(const Options& o) {
  if (o.config.empty()) throw Failure{IMPREG_ERR_CONFIG, "simulate needs --config"};
  const std::string cfg = config_text(o);
  Dataset data;
  check(impreg_simulate(cfg.c_str(), o.seed ? &*o.seed : nullptr, &data.p));
  if (o.out.empty() || o.out == "-") {
    Text json;
    check(impreg_dataset_to_json(data.p, &json.p));
    std::printf("%s\n", json.p);
  } else {
    check(impreg_dataset_save(data.p, o.out.c_str()));
  }
}

void run_fit(const Options& o, bool matrix) {
  if (o.data.empty()) throw Failure{IMPREG_ERR_CONFIG, "fit needs --data"};
  Dataset full;
  check(impreg_dataset_load(o.data.c_str(), &full.p));
  impreg_dataset_info info;
  check(impreg_dataset_info_get(full.p, &info));
  if (static_cast<bool>(info.is_matrix) != matrix)
    throw Failure{IMPREG_ERR_CONFIG, std::string("dataset holds ") +
                                         (info.is_matrix ? "matrix" : "vector") +
                                         " observations; use " +
                                         (info.is_matrix ? "fit-matrix" : "fit-vector")};
  Dataset train, test;
  const impreg_dataset* fit_on = full.p;
  if (o.train_half) {
    check(impreg_dataset_split(full.p, &train.p, &test.p));
    fit_on = train.p;
  }
  const std::string cfg = config_text(o);
  Trajectory traj;
  const impreg_status st = impreg_fit(fit_on, cfg.empty() ? nullptr : cfg.c_str(), &traj.p);
  const std::string message = impreg_last_error();
  if (!traj.p) check(st);
  Text csv;
  check(impreg_trajectory_csv(traj.p, &csv.p));
  emit(o.out, csv.p);
  if (!o.trajectory.empty()) check(impreg_trajectory_save(traj.p, o.trajectory.c_str()));
  if (st != IMPREG_OK) throw Failure{st, message};
}

void run_predict(const Options& o) {
  if (o.data.empty() || o.trajectory.empty())
    throw Failure{IMPREG_ERR_CONFIG, "predict needs --data and --trajectory"};
  Dataset full, train, test;
  check(impreg_dataset_load(o.data.c_str(), &full.p));
  check(impreg_dataset_split(full.p, &train.p, &test.p));
  Trajectory traj;
  check(impreg_trajectory_load(o.trajectory.c_str(), &traj.p));
  impreg_trajectory_info tinfo;
  impreg_dataset_info dinfo;
  check(impreg_trajectory_info_get(traj.p, &tinfo));
  check(impreg_dataset_info_get(train.p, &dinfo));
  if (tinfo.n_fit != dinfo.n)
    throw Failure{IMPREG_ERR_CONFIG,
                  "trajectory was fitted on " + std::to_string(tinfo.n_fit) +
                      " observations but the training half has " + std::to_string(dinfo.n) +
                      "; refit with --train-half"};
  const std::string cfg = config_text(o);
  std::int64_t t_sel = 0;
  Text report;
  check(impreg_select(traj.p, train.p, test.p, cfg.empty() ? nullptr : cfg.c_str(), &t_sel,
                      &report.p));
  emit(o.out, report.p);
}

void run_benchmark(const Options& o) {
  if (o.config.empty()) throw Failure{IMPREG_ERR_CONFIG, "benchmark needs --config"};
  const std::string cfg = config_text(o);
  Text metrics, summary;
  check(impreg_benchmark(cfg.c_str(), o.seed ? &*o.seed : nullptr, o.threads, &metrics.p,
                         o.summary.empty() ? nullptr : &summary.p));
  emit(o.out, metrics.p);
  if (!o.summary.empty()) emit(o.summary, summary.p);
}

void common_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "Seed override (u64)");
  cmd->add_option("--out", o.out, "Output path (default stdout)");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit-regularization estimators for single index models"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Generate a dataset JSON");
  common_flags(sim, o);

  auto* fv = app.add_subcommand("fit-vector", "Fit a sparse vector; writes trajectory CSV");
  auto* fm = app.add_subcommand("fit-matrix", "Fit a low-rank matrix; writes trajectory CSV");
  for (auto* cmd : {fv, fm}) {
    common_flags(cmd, o);
    cmd->add_option("--data", o.data, "Dataset JSON")->required();
    cmd->add_option("--trajectory", o.trajectory, "Also save the full trajectory JSON here");
    cmd->add_flag("--train-half", o.train_half, "Fit on the first half of the observations");
  }

  auto* pr = app.add_subcommand("predict", "Select a stopping time; writes selection CSV");
  common_flags(pr, o);
  pr->add_option("--data", o.data, "Dataset JSON")->required();
  pr->add_option("--trajectory", o.trajectory, "Trajectory JSON fitted with --train-half")
      ->required();

  auto* bm = app.add_subcommand("benchmark", "Run an experiment; writes metrics CSV");
  common_flags(bm, o);
  bm->add_option("--summary", o.summary, "Also write per-grid-point summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) run_simulate(o);
    else if (*fv) run_fit(o, false);
    else if (*fm) run_fit(o, true);
    else if (*pr) run_predict(o);
    else if (*bm) run_benchmark(o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return exit_code(f.status);
  }
  return 0;
}
