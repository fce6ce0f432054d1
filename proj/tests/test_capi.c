/* Exercises the C API from plain C. Argument: scratch directory. */
#include "readiness_kit.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

static int failures = 0;

#define EXPECT(cond)                                                        \
    do {                                                                    \
        if (!(cond)) {                                                      \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                     \
        }                                                                   \
    } while (0)

#define OK(call) EXPECT((call) == RK_OK)

static char* slurp(const char* path) {
    FILE* f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char* buf = malloc((size_t)n + 1);
    size_t got = fread(buf, 1, (size_t)n, f);
    buf[got] = '\0';
    fclose(f);
    return buf;
}

int main(int argc, char** argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: test_capi <scratch-dir>\n");
        return 2;
    }
    const char* work = argv[1];
    char path[4096];
    mkdir(work, 0755);

    EXPECT(strlen(rk_version()) > 0);
    EXPECT(strlen(rk_status_name(RK_E_PARSE)) > 0);
    EXPECT(rk_status_is_validation(RK_E_CONFIG));
    EXPECT(!rk_status_is_validation(RK_E_IO));

    /* Metrics on the 4-row fixture: AUROC 0.75. */
    const double probs[] = {0.1, 0.4, 0.35, 0.8};
    const int labels[] = {0, 0, 1, 1};
    rk_scoreset* s = NULL;
    OK(rk_scoreset_create(probs, labels, 4, &s));
    EXPECT(rk_scoreset_size(s) == 4);
    double v = 0.0;
    OK(rk_auroc(s, &v));
    EXPECT(fabs(v - 0.75) < 1e-12);
    OK(rk_brier(s, &v));
    EXPECT(fabs(v - (0.01 + 0.16 + 0.4225 + 0.04) / 4.0) < 1e-12);
    OK(rk_ece(s, 10, &v));
    EXPECT(v >= 0.0 && v <= 1.0);
    rk_ci ci;
    OK(rk_bootstrap_ci(s, RK_METRIC_AUROC, 100, 0.95, 7, 10, &ci));
    EXPECT(ci.lo <= ci.hi);
    EXPECT(fabs(ci.point - 0.75) < 1e-12);
    EXPECT(ci.n_resamples == 100);

    /* Validation errors carry a message. */
    const double bad[] = {1.5};
    const int one[] = {1};
    rk_scoreset* b = NULL;
    EXPECT(rk_scoreset_create(bad, one, 1, &b) == RK_E_INVALID_ARGUMENT);
    EXPECT(b == NULL);
    EXPECT(strlen(rk_last_error()) > 0);
    EXPECT(rk_auroc(NULL, &v) == RK_E_INVALID_ARGUMENT);
    const int same[] = {1, 1, 1, 1};
    rk_scoreset* single = NULL;
    OK(rk_scoreset_create(probs, same, 4, &single));
    EXPECT(rk_auroc(single, &v) == RK_E_UNDEFINED_METRIC);
    rk_scoreset_free(single);

    /* Calibration and conformal. */
    rk_calibrator* cal = NULL;
    OK(rk_calibrator_fit_isotonic(s, &cal));
    OK(rk_calibrator_predict(cal, 0.9, &v));
    EXPECT(v >= 0.0 && v <= 1.0);
    rk_scoreset* calibrated = NULL;
    OK(rk_calibrator_apply(cal, s, &calibrated));
    EXPECT(rk_scoreset_size(calibrated) == 4);
    snprintf(path, sizeof path, "%s/iso.cal", work);
    OK(rk_calibrator_save(cal, path));
    rk_calibrator* loaded = NULL;
    OK(rk_calibrator_load(path, &loaded));
    double w = 0.0;
    OK(rk_calibrator_predict(loaded, 0.9, &w));
    EXPECT(w == v);
    rk_calibrator_free(loaded);

    rk_conformal* m = NULL;
    OK(rk_conformal_fit(s, 0.5, &m));
    double q = 0.0;
    OK(rk_conformal_q_hat(m, &q));
    EXPECT(q >= 0.0 && q <= 1.0);
    int pos = -1, neg = -1;
    OK(rk_conformal_predict(m, 0.5, &pos, &neg));
    EXPECT(pos == 0 || pos == 1);
    rk_coverage cov;
    OK(rk_conformal_coverage(m, s, &cov));
    EXPECT(cov.n == 4);
    EXPECT(rk_conformal_fit(s, 1.5, &m) == RK_E_INVALID_ARGUMENT);

    /* Subgroup report over a tag column. */
    const char* groups[] = {"a", "a", "b", "b"};
    OK(rk_scoreset_set_tag(s, "grp", groups, 4));
    char* json = NULL;
    OK(rk_subgroup_ece_json(s, "grp", 5, 2, &json));
    EXPECT(json && strstr(json, "grp=a") != NULL);
    rk_string_free(json);

    /* Checklist on published values. */
    snprintf(path, sizeof path, "%s/config/published_metrics.json", RK_SOURCE_DIR);
    char* metrics = slurp(path);
    EXPECT(metrics != NULL);
    if (metrics) {
        OK(rk_checklist_from_metrics_json(metrics, &json));
        EXPECT(json && strstr(json, "\"total\": 2") != NULL);
        rk_string_free(json);
        free(metrics);
    }
    EXPECT(rk_checklist_from_metrics_json("{", &json) == RK_E_PARSE);

    /* Pipeline: stage ordering and the published-metrics checklist. */
    char cfg[4096];
    snprintf(cfg, sizeof cfg, "%s/config/default.cfg", RK_SOURCE_DIR);
    rk_run_options opts;
    memset(&opts, 0, sizeof opts);
    snprintf(path, sizeof path, "%s/fresh-%ld", work, (long)rand());
    opts.out_dir = path;
    char* log = NULL;
    EXPECT(rk_pipeline_run(cfg, "conformal", &opts, &log) == RK_E_MISSING_ARTIFACT);
    EXPECT(strstr(rk_last_error(), "train") != NULL);
    EXPECT(rk_pipeline_run(cfg, "deploy", &opts, &log) == RK_E_INVALID_ARGUMENT);
    EXPECT(rk_pipeline_run("/nonexistent.cfg", "ingest", &opts, &log) == RK_E_CONFIG);
    char published[4096];
    snprintf(published, sizeof published, "%s/config/published_metrics.json", RK_SOURCE_DIR);
    opts.metrics_path = published;
    OK(rk_pipeline_run(cfg, "checklist", &opts, &log));
    EXPECT(log && strstr(log, "checklist:") != NULL);
    rk_string_free(log);

    rk_conformal_free(m);
    rk_calibrator_free(cal);
    rk_scoreset_free(calibrated);
    rk_scoreset_free(s);
    rk_scoreset_free(NULL);
    rk_calibrator_free(NULL);
    rk_conformal_free(NULL);

    if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
    return failures ? 1 : 0;
}
