/* C interface to the impreg library. Every function returns an impreg_status;
 * on failure impreg_last_error() describes the problem (thread-local). Strings
 * returned through char** must be released with impreg_string_free. */
#ifndef IMPREG_H
#define IMPREG_H

#include <stddef.h>
#include <stdint.h>

#if defined(IMPREG_BUILDING)
#define IMPREG_API __attribute__((visibility("default")))
#else
#define IMPREG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum impreg_status {
  IMPREG_OK = 0,
  IMPREG_ERR_INTERNAL = 1,
  IMPREG_ERR_CONFIG = 2,
  IMPREG_ERR_DIVERGENCE = 3,
  IMPREG_ERR_INVALID_ARGUMENT = 4,
  IMPREG_ERR_IO = 5,
  IMPREG_ERR_NUMERIC = 6
} impreg_status;

typedef struct impreg_dataset impreg_dataset;
typedef struct impreg_trajectory impreg_trajectory;

typedef struct impreg_dataset_info {
  int is_matrix;
  int64_t n;
  int64_t dim;      /* p for vectors, d for matrices */
  int64_t sparsity; /* |support| or rank */
  uint64_t seed;
  int has_mu_star;
  double mu_star;
} impreg_dataset_info;

typedef struct impreg_trajectory_info {
  int is_matrix;
  int64_t dim;
  int64_t records;
  int64_t n_fit;
  int diverged;
  int64_t diverged_at;
} impreg_trajectory_info;

IMPREG_API const char* impreg_version(void);
IMPREG_API const char* impreg_last_error(void);
IMPREG_API const char* impreg_status_name(impreg_status status);
IMPREG_API void impreg_string_free(char* s);

/* ---- datasets ---- */

/* config_json follows the simulate layout; seed, when non-NULL, overrides
 * the config's seed. */
IMPREG_API impreg_status impreg_simulate(const char* config_json, const uint64_t* seed,
                              impreg_dataset** out);
IMPREG_API impreg_status impreg_dataset_load(const char* path, impreg_dataset** out);
IMPREG_API impreg_status impreg_dataset_save(const impreg_dataset* data, const char* path);
IMPREG_API impreg_status impreg_dataset_to_json(const impreg_dataset* data, char** out);
IMPREG_API impreg_status impreg_dataset_info_get(const impreg_dataset* data, impreg_dataset_info* out);
/* First floor(n/2) observations train, the rest test. */
IMPREG_API impreg_status impreg_dataset_split(const impreg_dataset* data, impreg_dataset** train,
                                   impreg_dataset** test);
IMPREG_API void impreg_dataset_free(impreg_dataset* data);

/* ---- fitting ---- */

/* Runs the over-parameterized solver on the dataset's score moment.
 * config_json may be NULL for defaults. A diverged run still returns the
 * trajectory but with status IMPREG_ERR_DIVERGENCE. */
IMPREG_API impreg_status impreg_fit(const impreg_dataset* data, const char* config_json,
                         impreg_trajectory** out);
IMPREG_API impreg_status impreg_trajectory_csv(const impreg_trajectory* traj, char** out);
IMPREG_API impreg_status impreg_trajectory_save(const impreg_trajectory* traj, const char* path);
IMPREG_API impreg_status impreg_trajectory_load(const char* path, impreg_trajectory** out);
IMPREG_API impreg_status impreg_trajectory_info_get(const impreg_trajectory* traj,
                                         impreg_trajectory_info* out);
/* Copies record `index`; beta (row-major) needs room for dim (vector) or
 * dim*dim (matrix) doubles and may be NULL. */
IMPREG_API impreg_status impreg_trajectory_record(const impreg_trajectory* traj, int64_t index,
                                       int64_t* t, double* loss, double* beta);
IMPREG_API void impreg_trajectory_free(impreg_trajectory* traj);

/* ---- selection and benchmarks ---- */

/* Chooses a stopping time for a trajectory fitted on `train` by kernel
 * prediction risk on `test`. report_csv may be NULL. */
IMPREG_API impreg_status impreg_select(const impreg_trajectory* traj, const impreg_dataset* train,
                            const impreg_dataset* test, const char* config_json,
                            int64_t* t_selected, char** report_csv);
/* Runs an experiment config; either output may be NULL. */
IMPREG_API impreg_status impreg_benchmark(const char* config_json, const uint64_t* seed, int threads,
                               char** metrics_csv, char** summary_csv);

/* ---- numeric primitives (row-major arrays) ---- */

IMPREG_API impreg_status impreg_psi(double x, double* out);
IMPREG_API impreg_status impreg_spectral_shrink(const double* a, int64_t rows, int64_t cols, double kappa,
                                     double* out);
IMPREG_API impreg_status impreg_dist(const double* beta_hat, const double* beta_star, int64_t len,
                          double* out);
IMPREG_API impreg_status impreg_support_metrics(const int64_t* estimated, int64_t n_estimated,
                                     const int64_t* truth, int64_t n_truth, int64_t p,
                                     double* fdr, double* tpr);
IMPREG_API impreg_status impreg_l1_baseline(const double* phi, int64_t p, double lambda, double* out);

#ifdef __cplusplus
}
#endif

#endif
