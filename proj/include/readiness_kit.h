/* readiness-kit C API.
 *
 * All functions return an rk_status. On failure, rk_last_error() returns a
 * message for the calling thread, valid until the next API call on that thread.
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with rk_string_free. Handles are released with their
 * matching *_free function; passing NULL to a free function is a no-op.
 */
#ifndef READINESS_KIT_H
#define READINESS_KIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RK_BUILDING_LIBRARY)
#define RK_API __declspec(dllexport)
#else
#define RK_API __declspec(dllimport)
#endif
#else
#define RK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rk_status {
    RK_OK = 0,
    RK_E_INVALID_ARGUMENT = 1,
    RK_E_PARSE = 2,
    RK_E_SCHEMA = 3,
    RK_E_ENCODING = 4,
    RK_E_SPLIT = 5,
    RK_E_DOMAIN = 6,
    RK_E_UNDEFINED_METRIC = 7,
    RK_E_FIT = 8,
    RK_E_IO = 9,
    RK_E_CONFIG = 10,
    RK_E_MISSING_ARTIFACT = 11,
    RK_E_INTERNAL = 99
} rk_status;

/* Nonzero for errors caused by bad input (parse, schema, config, argument). */
RK_API int rk_status_is_validation(rk_status status);
RK_API const char* rk_status_name(rk_status status);
RK_API const char* rk_last_error(void);
RK_API const char* rk_version(void);
RK_API void rk_string_free(char* s);

/* ---- score sets --------------------------------------------------------- */

typedef struct rk_scoreset rk_scoreset;

/* Copies `n` probabilities and labels. Probabilities must lie in [0,1] and
 * labels in {0,1}. */
RK_API rk_status rk_scoreset_create(const double* probs, const int* labels, size_t n, rk_scoreset** out);
/* Score CSV: prob,label[,tag...] */
RK_API rk_status rk_scoreset_load(const char* path, rk_scoreset** out);
RK_API rk_status rk_scoreset_save(const rk_scoreset* s, const char* path);
/* Attaches a per-row string tag column; `values` holds `n` strings. */
RK_API rk_status rk_scoreset_set_tag(rk_scoreset* s, const char* key, const char* const* values, size_t n);
RK_API size_t rk_scoreset_size(const rk_scoreset* s);
RK_API rk_status rk_scoreset_prob(const rk_scoreset* s, size_t i, double* out);
RK_API void rk_scoreset_free(rk_scoreset* s);

/* ---- metrics ------------------------------------------------------------ */

RK_API rk_status rk_auroc(const rk_scoreset* s, double* out);
RK_API rk_status rk_auprc(const rk_scoreset* s, double* out);
RK_API rk_status rk_ece(const rk_scoreset* s, size_t n_bins, double* out);
RK_API rk_status rk_mce(const rk_scoreset* s, size_t n_bins, double* out);
RK_API rk_status rk_brier(const rk_scoreset* s, double* out);
RK_API rk_status rk_brier_skill(const rk_scoreset* s, double* out);

typedef enum rk_metric { RK_METRIC_AUROC = 0, RK_METRIC_ECE = 1 } rk_metric;

typedef struct rk_ci {
    double point;
    double lo;
    double hi;
    size_t n_resamples;
    size_t redraws;
} rk_ci;

RK_API rk_status rk_bootstrap_ci(const rk_scoreset* s, rk_metric metric, size_t n_resamples, double level,
                                 uint64_t seed, size_t ece_bins, rk_ci* out);

/* ---- calibration -------------------------------------------------------- */

typedef struct rk_calibrator rk_calibrator;

RK_API rk_status rk_calibrator_fit_platt(const rk_scoreset* val, rk_calibrator** out);
RK_API rk_status rk_calibrator_fit_isotonic(const rk_scoreset* val, rk_calibrator** out);
RK_API rk_status rk_calibrator_load(const char* path, rk_calibrator** out);
RK_API rk_status rk_calibrator_save(const rk_calibrator* c, const char* path);
RK_API rk_status rk_calibrator_predict(const rk_calibrator* c, double prob, double* out);
/* New score set with transformed probabilities; labels and tags copied. */
RK_API rk_status rk_calibrator_apply(const rk_calibrator* c, const rk_scoreset* s, rk_scoreset** out);
RK_API void rk_calibrator_free(rk_calibrator* c);

/* ---- conformal ---------------------------------------------------------- */

typedef struct rk_conformal rk_conformal;

typedef struct rk_coverage {
    double coverage;
    double avg_set_size;
    double singleton_rate;
    double empty_rate;
    size_t n;
} rk_coverage;

RK_API rk_status rk_conformal_fit(const rk_scoreset* cal, double alpha, rk_conformal** out);
RK_API rk_status rk_conformal_q_hat(const rk_conformal* m, double* out);
/* Writes 0/1 membership flags for the positive and negative class. */
RK_API rk_status rk_conformal_predict(const rk_conformal* m, double prob, int* contains_pos, int* contains_neg);
RK_API rk_status rk_conformal_coverage(const rk_conformal* m, const rk_scoreset* test, rk_coverage* out);
RK_API void rk_conformal_free(rk_conformal* m);

/* ---- readiness ---------------------------------------------------------- */

/* Scores the checklist for published-metric JSON ({"models": [...]}) and
 * returns the checklist report JSON. */
RK_API rk_status rk_checklist_from_metrics_json(const char* metrics_json, char** report_json);

/* Subgroup ECE report JSON. `selectors` is a comma-separated list such as
 * "age_group,dm=yes". */
RK_API rk_status rk_subgroup_ece_json(const rk_scoreset* s, const char* selectors, size_t n_bins, size_t min_n,
                                      char** report_json);

/* ---- pipeline ----------------------------------------------------------- */

typedef struct rk_run_options {
    int has_seed;
    uint64_t seed;
    const char* out_dir;      /* NULL keeps the configured directory */
    const char* metrics_path; /* checklist only; NULL or "" to use pipeline tables */
} rk_run_options;

/* Runs `command` (ingest, train, evaluate, calibrate, conformal, subgroup,
 * checklist, report or all). `log`, when non-NULL, receives one line per
 * completed stage. */
RK_API rk_status rk_pipeline_run(const char* config_path, const char* command, const rk_run_options* options,
                                 char** log);

#ifdef __cplusplus
}
#endif

#endif /* READINESS_KIT_H */
