#include "impreg/impreg.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "impreg/error.hpp"
#include "impreg/io.hpp"
#include "impreg/robust.hpp"

struct impreg_dataset {
  impreg::io::Dataset data;
};

struct impreg_trajectory {
  impreg::Trajectory traj;
  std::int64_t n_fit = 0;
};

namespace {

thread_local std::string last_error;

impreg_status status_of(impreg::ErrorCode code) {
  using impreg::ErrorCode;
  switch (code) {
    case ErrorCode::Config: return IMPREG_ERR_CONFIG;
    case ErrorCode::Divergence: return IMPREG_ERR_DIVERGENCE;
    case ErrorCode::Io: return IMPREG_ERR_IO;
    case ErrorCode::ZeroNorm:
    case ErrorCode::IllConditioned:
    case ErrorCode::NotPositiveDefinite: return IMPREG_ERR_NUMERIC;
    default: return IMPREG_ERR_INVALID_ARGUMENT;
  }
}

template <class Body>
impreg_status guard(Body&& body) {
  try {
    last_error.clear();
    body();
    return IMPREG_OK;
  } catch (const impreg::Error& e) {
    last_error = std::string(impreg::to_string(e.code())) + ": " + e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return IMPREG_ERR_INTERNAL;
}

void need(bool cond, const char* what) {
  if (!cond) impreg::fail(impreg::ErrorCode::InvalidArgument, what);
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

impreg::io::json config_or_null(const char* text) {
  if (!text || !*text) return nullptr;
  return impreg::io::parse(text);
}

}  // namespace

extern "C" {

const char* impreg_version(void) { return "0.1.0"; }

const char* impreg_last_error(void) { return last_error.c_str(); }

const char* impreg_status_name(impreg_status status) {
  switch (status) {
    case IMPREG_OK: return "ok";
    case IMPREG_ERR_INTERNAL: return "internal";
    case IMPREG_ERR_CONFIG: return "config";
    case IMPREG_ERR_DIVERGENCE: return "divergence";
    case IMPREG_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case IMPREG_ERR_IO: return "io";
    case IMPREG_ERR_NUMERIC: return "numeric";
  }
  return "unknown";
}

void impreg_string_free(char* s) { std::free(s); }

impreg_status impreg_simulate(const char* config_json, const uint64_t* seed,
                              impreg_dataset** out) {
  return guard([&] {
    need(config_json && out, "impreg_simulate: null argument");
    auto cfg = impreg::io::simulate_config_from_json(impreg::io::parse(config_json));
    if (seed) cfg.seed = *seed;
    *out = new impreg_dataset{impreg::io::simulate(cfg)};
  });
}

impreg_status impreg_dataset_load(const char* path, impreg_dataset** out) {
  return guard([&] {
    need(path && out, "impreg_dataset_load: null argument");
    const auto j = impreg::io::parse(impreg::io::read_file(path));
    *out = new impreg_dataset{impreg::io::dataset_from_json(j)};
  });
}

impreg_status impreg_dataset_save(const impreg_dataset* data, const char* path) {
  return guard([&] {
    need(data && path, "impreg_dataset_save: null argument");
    impreg::io::write_file(path, impreg::io::dataset_to_json(data->data).dump() + "\n");
  });
}

impreg_status impreg_dataset_to_json(const impreg_dataset* data, char** out) {
  return guard([&] {
    need(data && out, "impreg_dataset_to_json: null argument");
    *out = dup(impreg::io::dataset_to_json(data->data).dump());
  });
}

impreg_status impreg_dataset_info_get(const impreg_dataset* data, impreg_dataset_info* out) {
  return guard([&] {
    need(data && out, "impreg_dataset_info_get: null argument");
    *out = impreg_dataset_info{};
    std::visit(
        [&](const auto& inst) {
          using T = std::decay_t<decltype(inst)>;
          out->n = inst.n();
          out->seed = inst.seed;
          out->has_mu_star = inst.mu_star.has_value();
          out->mu_star = inst.mu_star.value_or(0.0);
          if constexpr (std::is_same_v<T, impreg::SimInstance>) {
            out->is_matrix = 0;
            out->dim = inst.p();
            out->sparsity = static_cast<int64_t>(inst.support.size());
          } else {
            out->is_matrix = 1;
            out->dim = inst.d();
            out->sparsity = inst.rank;
          }
        },
        data->data);
  });
}

impreg_status impreg_dataset_split(const impreg_dataset* data, impreg_dataset** train,
                                   impreg_dataset** test) {
  return guard([&] {
    need(data && train && test, "impreg_dataset_split: null argument");
    std::visit(
        [&](const auto& inst) {
          need(inst.n() >= 2, "impreg_dataset_split: need at least two observations");
          auto [a, b] = impreg::split_half(inst);
          *train = new impreg_dataset{std::move(a)};
          *test = new impreg_dataset{std::move(b)};
        },
        data->data);
  });
}

void impreg_dataset_free(impreg_dataset* data) { delete data; }

impreg_status impreg_fit(const impreg_dataset* data, const char* config_json,
                         impreg_trajectory** out) {
  impreg_status st = guard([&] {
    need(data && out, "impreg_fit: null argument");
    *out = nullptr;
    const bool matrix = std::holds_alternative<impreg::MatrixSimInstance>(data->data);
    const auto cfg = impreg::io::fit_config_from_json(config_or_null(config_json), matrix);
    auto traj = impreg::io::fit(data->data, cfg);
    const auto n = std::visit([](const auto& inst) { return inst.n(); }, data->data);
    *out = new impreg_trajectory{std::move(traj), n};
  });
  if (st == IMPREG_OK && (*out)->traj.diverged) {
    last_error = "divergence: solver diverged at t=" + std::to_string((*out)->traj.diverged_at);
    return IMPREG_ERR_DIVERGENCE;
  }
  return st;
}

impreg_status impreg_trajectory_csv(const impreg_trajectory* traj, char** out) {
  return guard([&] {
    need(traj && out, "impreg_trajectory_csv: null argument");
    *out = dup(impreg::io::trajectory_csv(traj->traj));
  });
}

impreg_status impreg_trajectory_save(const impreg_trajectory* traj, const char* path) {
  return guard([&] {
    need(traj && path, "impreg_trajectory_save: null argument");
    impreg::io::write_file(path,
                           impreg::io::trajectory_to_json(traj->traj, traj->n_fit).dump() + "\n");
  });
}

impreg_status impreg_trajectory_load(const char* path, impreg_trajectory** out) {
  return guard([&] {
    need(path && out, "impreg_trajectory_load: null argument");
    std::int64_t n_fit = 0;
    auto traj = impreg::io::trajectory_from_json(
        impreg::io::parse(impreg::io::read_file(path)), &n_fit);
    *out = new impreg_trajectory{std::move(traj), n_fit};
  });
}

impreg_status impreg_trajectory_info_get(const impreg_trajectory* traj,
                                         impreg_trajectory_info* out) {
  return guard([&] {
    need(traj && out, "impreg_trajectory_info_get: null argument");
    const auto& t = traj->traj;
    out->is_matrix = t.kind == impreg::TrajectoryKind::Matrix;
    out->dim = t.records.empty() ? 0 : t.records.front().beta.rows();
    out->records = static_cast<int64_t>(t.records.size());
    out->n_fit = traj->n_fit;
    out->diverged = t.diverged;
    out->diverged_at = t.diverged_at;
  });
}

impreg_status impreg_trajectory_record(const impreg_trajectory* traj, int64_t index,
                                       int64_t* t, double* loss, double* beta) {
  return guard([&] {
    need(traj, "impreg_trajectory_record: null trajectory");
    const auto& recs = traj->traj.records;
    need(index >= 0 && index < static_cast<int64_t>(recs.size()),
         "impreg_trajectory_record: index out of range");
    const auto& r = recs[static_cast<size_t>(index)];
    if (t) *t = r.t;
    if (loss) *loss = r.loss;
    if (beta)
      for (Eigen::Index i = 0; i < r.beta.rows(); ++i)
        for (Eigen::Index k = 0; k < r.beta.cols(); ++k) *beta++ = r.beta(i, k);
  });
}

void impreg_trajectory_free(impreg_trajectory* traj) { delete traj; }

impreg_status impreg_select(const impreg_trajectory* traj, const impreg_dataset* train,
                            const impreg_dataset* test, const char* config_json,
                            int64_t* t_selected, char** report_csv) {
  return guard([&] {
    need(traj && train && test, "impreg_select: null argument");
    const auto opts = impreg::io::selection_options_from_json(config_or_null(config_json));
    const auto* vtrain = std::get_if<impreg::SimInstance>(&train->data);
    const auto* vtest = std::get_if<impreg::SimInstance>(&test->data);
    const auto* mtrain = std::get_if<impreg::MatrixSimInstance>(&train->data);
    const auto* mtest = std::get_if<impreg::MatrixSimInstance>(&test->data);
    const bool matrix = traj->traj.kind == impreg::TrajectoryKind::Matrix;
    impreg::SelectionReport report;
    if (!matrix) {
      need(vtrain && vtest, "impreg_select: vector trajectory needs vector datasets");
      report = impreg::select_stopping_time(traj->traj, *vtrain, *vtest, opts);
    } else {
      need(mtrain && mtest, "impreg_select: matrix trajectory needs matrix datasets");
      report = impreg::select_stopping_time(traj->traj, *mtrain, *mtest, opts);
    }
    if (t_selected) *t_selected = report.t_selected;
    if (report_csv) *report_csv = dup(impreg::io::selection_csv(report));
  });
}

impreg_status impreg_benchmark(const char* config_json, const uint64_t* seed, int threads,
                               char** metrics_csv, char** summary_csv) {
  return guard([&] {
    need(config_json, "impreg_benchmark: null config");
    auto cfg = impreg::io::experiment_config_from_json(impreg::io::parse(config_json));
    if (seed) cfg.master_seed = *seed;
    const auto rows = impreg::run_experiment(cfg, threads < 1 ? 1 : threads);
    char* m = metrics_csv ? dup(impreg::io::metrics_csv(rows, cfg.record_wall_time)) : nullptr;
    if (summary_csv) {
      try {
        *summary_csv = dup(impreg::io::summary_csv(impreg::summarize(cfg, rows)));
      } catch (...) {
        std::free(m);
        throw;
      }
    }
    if (metrics_csv) *metrics_csv = m;
  });
}

impreg_status impreg_psi(double x, double* out) {
  return guard([&] {
    need(out, "impreg_psi: null output");
    *out = impreg::psi(x);
  });
}

impreg_status impreg_spectral_shrink(const double* a, int64_t rows, int64_t cols, double kappa,
                                     double* out) {
  return guard([&] {
    need(a && out && rows > 0 && cols > 0, "impreg_spectral_shrink: bad arguments");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        in(a, rows, cols);
    const impreg::Matrix res = impreg::spectral_shrink(in, kappa);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out, rows, cols) = res;
  });
}

impreg_status impreg_dist(const double* beta_hat, const double* beta_star, int64_t len,
                          double* out) {
  return guard([&] {
    need(beta_hat && beta_star && out && len > 0, "impreg_dist: bad arguments");
    const impreg::Matrix b = Eigen::Map<const impreg::Vector>(beta_hat, len);
    const impreg::Matrix s = Eigen::Map<const impreg::Vector>(beta_star, len);
    *out = impreg::dist_metric(b, s);
  });
}

impreg_status impreg_support_metrics(const int64_t* estimated, int64_t n_estimated,
                                     const int64_t* truth, int64_t n_truth, int64_t p,
                                     double* fdr, double* tpr) {
  return guard([&] {
    need(fdr && tpr && n_estimated >= 0 && n_truth >= 0, "impreg_support_metrics: bad arguments");
    need((estimated || n_estimated == 0) && (truth || n_truth == 0),
         "impreg_support_metrics: null support");
    const std::vector<Eigen::Index> est(estimated, estimated + n_estimated);
    const std::vector<Eigen::Index> tr(truth, truth + n_truth);
    const auto m = impreg::support_metrics(est, tr, p);
    *fdr = m.fdr;
    *tpr = m.tpr;
  });
}

impreg_status impreg_l1_baseline(const double* phi, int64_t p, double lambda, double* out) {
  return guard([&] {
    need(phi && out && p > 0, "impreg_l1_baseline: bad arguments");
    const impreg::Vector res = impreg::l1_baseline(Eigen::Map<const impreg::Vector>(phi, p), lambda);
    Eigen::Map<impreg::Vector>(out, p) = res;
  });
}

}  // extern "C"
