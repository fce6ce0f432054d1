#include "readiness_kit.h"

#include "rk/calibrate.hpp"
#include "rk/conformal.hpp"
#include "rk/error.hpp"
#include "rk/metrics.hpp"
#include "rk/pipeline.hpp"
#include "rk/readiness.hpp"
#include "rk/scoreset.hpp"
#include "rk/text.hpp"
#include "rk/version.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct rk_scoreset {
    rk::ScoreSet s;
};
struct rk_calibrator {
    rk::calibrate::Calibrator c;
};
struct rk_conformal {
    rk::conformal::ConformalModel m;
};

namespace {

thread_local std::string g_last_error;

rk_status status_of(rk::ErrorKind k) {
    using K = rk::ErrorKind;
    switch (k) {
    case K::InvalidArgument: return RK_E_INVALID_ARGUMENT;
    case K::Parse: return RK_E_PARSE;
    case K::Schema: return RK_E_SCHEMA;
    case K::Encoding: return RK_E_ENCODING;
    case K::Split: return RK_E_SPLIT;
    case K::Domain: return RK_E_DOMAIN;
    case K::UndefinedMetric: return RK_E_UNDEFINED_METRIC;
    case K::Fit: return RK_E_FIT;
    case K::Io: return RK_E_IO;
    case K::Config: return RK_E_CONFIG;
    case K::MissingArtifact: return RK_E_MISSING_ARTIFACT;
    }
    return RK_E_INTERNAL;
}

template <typename F>
rk_status guard(F&& f) {
    g_last_error.clear();
    try {
        f();
        return RK_OK;
    } catch (const rk::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return RK_E_INTERNAL;
}

void need(const void* p, const char* what) {
    if (!p) throw rk::ArgumentError(std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

int rk_status_is_validation(rk_status s) {
    return s == RK_E_INVALID_ARGUMENT || s == RK_E_PARSE || s == RK_E_SCHEMA || s == RK_E_CONFIG;
}

const char* rk_status_name(rk_status s) {
    switch (s) {
    case RK_OK: return "ok";
    case RK_E_INVALID_ARGUMENT: return "invalid argument";
    case RK_E_PARSE: return "parse error";
    case RK_E_SCHEMA: return "schema error";
    case RK_E_ENCODING: return "encoding error";
    case RK_E_SPLIT: return "split error";
    case RK_E_DOMAIN: return "domain error";
    case RK_E_UNDEFINED_METRIC: return "undefined metric";
    case RK_E_FIT: return "fit error";
    case RK_E_IO: return "i/o error";
    case RK_E_CONFIG: return "config error";
    case RK_E_MISSING_ARTIFACT: return "missing artifact";
    case RK_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* rk_last_error(void) { return g_last_error.c_str(); }

const char* rk_version(void) { return rk::kVersion; }

void rk_string_free(char* s) { std::free(s); }

rk_status rk_scoreset_create(const double* probs, const int* labels, size_t n, rk_scoreset** out) {
    return guard([&] {
        need(out, "out");
        if (n > 0) {
            need(probs, "probs");
            need(labels, "labels");
        }
        auto h = std::make_unique<rk_scoreset>();
        h->s = rk::make_scoreset(std::vector<double>(probs, probs + n), std::vector<int>(labels, labels + n));
        *out = h.release();
    });
}

rk_status rk_scoreset_load(const char* path, rk_scoreset** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        auto h = std::make_unique<rk_scoreset>();
        h->s = rk::import_scores(path);
        *out = h.release();
    });
}

rk_status rk_scoreset_save(const rk_scoreset* s, const char* path) {
    return guard([&] {
        need(s, "scoreset");
        need(path, "path");
        rk::export_scores(s->s, path);
    });
}

rk_status rk_scoreset_set_tag(rk_scoreset* s, const char* key, const char* const* values, size_t n) {
    return guard([&] {
        need(s, "scoreset");
        need(key, "key");
        if (n != s->s.size()) throw rk::ArgumentError("tag length differs from score set size");
        std::vector<std::string> v;
        for (size_t i = 0; i < n; ++i) {
            need(values[i], "tag value");
            v.emplace_back(values[i]);
        }
        s->s.tags[key] = std::move(v);
    });
}

size_t rk_scoreset_size(const rk_scoreset* s) { return s ? s->s.size() : 0; }

rk_status rk_scoreset_prob(const rk_scoreset* s, size_t i, double* out) {
    return guard([&] {
        need(s, "scoreset");
        need(out, "out");
        if (i >= s->s.size()) throw rk::ArgumentError("row index out of range");
        *out = s->s.probs[i];
    });
}

void rk_scoreset_free(rk_scoreset* s) { delete s; }

#define RK_METRIC_FN(name, expr)                                                                                   \
    rk_status name(const rk_scoreset* s, double* out) {                                                            \
        return guard([&] {                                                                                         \
            need(s, "scoreset");                                                                                   \
            need(out, "out");                                                                                      \
            *out = (expr);                                                                                         \
        });                                                                                                        \
    }

RK_METRIC_FN(rk_auroc, rk::metrics::auroc(s->s))
RK_METRIC_FN(rk_auprc, rk::metrics::auprc(s->s))
RK_METRIC_FN(rk_brier, rk::metrics::brier(s->s))
RK_METRIC_FN(rk_brier_skill, rk::metrics::brier_skill(s->s))
#undef RK_METRIC_FN

rk_status rk_ece(const rk_scoreset* s, size_t n_bins, double* out) {
    return guard([&] {
        need(s, "scoreset");
        need(out, "out");
        *out = rk::metrics::ece(s->s, n_bins);
    });
}

rk_status rk_mce(const rk_scoreset* s, size_t n_bins, double* out) {
    return guard([&] {
        need(s, "scoreset");
        need(out, "out");
        if (s->s.size() == 0) throw rk::UndefinedMetric("MCE of an empty score set");
        *out = rk::metrics::mce(rk::metrics::reliability_bins(s->s, n_bins));
    });
}

rk_status rk_bootstrap_ci(const rk_scoreset* s, rk_metric metric, size_t n_resamples, double level, uint64_t seed,
                          size_t ece_bins, rk_ci* out) {
    return guard([&] {
        need(s, "scoreset");
        need(out, "out");
        if (metric != RK_METRIC_AUROC && metric != RK_METRIC_ECE) throw rk::ArgumentError("unknown metric");
        const auto kind = metric == RK_METRIC_AUROC ? rk::metrics::MetricKind::Auroc : rk::metrics::MetricKind::Ece;
        const auto ci = rk::metrics::bootstrap_ci(s->s, kind, n_resamples, level, seed, ece_bins);
        *out = {ci.point, ci.lo, ci.hi, ci.n_resamples, ci.redraws};
    });
}

rk_status rk_calibrator_fit_platt(const rk_scoreset* val, rk_calibrator** out) {
    return guard([&] {
        need(val, "scoreset");
        need(out, "out");
        *out = new rk_calibrator{rk::calibrate::fit_platt(val->s)};
    });
}

rk_status rk_calibrator_fit_isotonic(const rk_scoreset* val, rk_calibrator** out) {
    return guard([&] {
        need(val, "scoreset");
        need(out, "out");
        *out = new rk_calibrator{rk::calibrate::fit_isotonic(val->s)};
    });
}

rk_status rk_calibrator_load(const char* path, rk_calibrator** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new rk_calibrator{rk::calibrate::calibrator_from_text(rk::text::read_file(path))};
    });
}

rk_status rk_calibrator_save(const rk_calibrator* c, const char* path) {
    return guard([&] {
        need(c, "calibrator");
        need(path, "path");
        rk::text::write_file(path, rk::calibrate::calibrator_to_text(c->c));
    });
}

rk_status rk_calibrator_predict(const rk_calibrator* c, double prob, double* out) {
    return guard([&] {
        need(c, "calibrator");
        need(out, "out");
        if (!(prob >= 0.0 && prob <= 1.0)) throw rk::ArgumentError("probability outside [0,1]");
        *out = std::visit([&](const auto& f) { return f(prob); }, c->c);
    });
}

rk_status rk_calibrator_apply(const rk_calibrator* c, const rk_scoreset* s, rk_scoreset** out) {
    return guard([&] {
        need(c, "calibrator");
        need(s, "scoreset");
        need(out, "out");
        *out = new rk_scoreset{rk::calibrate::apply(c->c, s->s)};
    });
}

void rk_calibrator_free(rk_calibrator* c) { delete c; }

rk_status rk_conformal_fit(const rk_scoreset* cal, double alpha, rk_conformal** out) {
    return guard([&] {
        need(cal, "scoreset");
        need(out, "out");
        *out = new rk_conformal{rk::conformal::fit_conformal(cal->s, alpha)};
    });
}

rk_status rk_conformal_q_hat(const rk_conformal* m, double* out) {
    return guard([&] {
        need(m, "conformal model");
        need(out, "out");
        *out = m->m.q_hat;
    });
}

rk_status rk_conformal_predict(const rk_conformal* m, double prob, int* contains_pos, int* contains_neg) {
    return guard([&] {
        need(m, "conformal model");
        need(contains_pos, "contains_pos");
        need(contains_neg, "contains_neg");
        const auto set = rk::conformal::predict_set(m->m, prob);
        *contains_pos = set.contains_pos;
        *contains_neg = set.contains_neg;
    });
}

rk_status rk_conformal_coverage(const rk_conformal* m, const rk_scoreset* test, rk_coverage* out) {
    return guard([&] {
        need(m, "conformal model");
        need(test, "scoreset");
        need(out, "out");
        const auto r = rk::conformal::coverage_report(m->m, test->s);
        *out = {r.coverage, r.avg_set_size, r.singleton_rate, r.empty_rate, r.n};
    });
}

void rk_conformal_free(rk_conformal* m) { delete m; }

rk_status rk_checklist_from_metrics_json(const char* metrics_json, char** report_json) {
    return guard([&] {
        need(metrics_json, "metrics_json");
        need(report_json, "report_json");
        const auto specs = rk::readiness::default_criteria();
        std::vector<rk::readiness::ChecklistReport> reports;
        for (const auto& ni : rk::readiness::inputs_from_json(metrics_json)) {
            reports.push_back(rk::readiness::score_checklist(ni.inputs, specs, ni.model, ni.variant));
        }
        *report_json = dup(rk::readiness::checklist_to_json(reports, specs));
    });
}

rk_status rk_subgroup_ece_json(const rk_scoreset* s, const char* selectors, size_t n_bins, size_t min_n,
                               char** report_json) {
    return guard([&] {
        need(s, "scoreset");
        need(selectors, "selectors");
        need(report_json, "report_json");
        std::vector<rk::readiness::GroupSelector> sel;
        for (const auto& item : rk::text::split(selectors, ',')) {
            if (!rk::text::trim(item).empty()) sel.push_back(rk::readiness::GroupSelector::parse(item));
        }
        const auto rep = rk::readiness::subgroup_ece(s->s, sel, n_bins, min_n);
        nlohmann::ordered_json j;
        j["n_bins"] = rep.n_bins;
        j["min_group_size"] = rep.min_group_size;
        j["groups"] = nlohmann::ordered_json::array();
        for (const auto& g : rep.groups) {
            j["groups"].push_back({{"group", g.name},
                                   {"n", g.n},
                                   {"ece", g.ece ? nlohmann::ordered_json(*g.ece) : nlohmann::ordered_json(nullptr)},
                                   {"excluded", g.excluded}});
        }
        j["max_ece"] = rep.max_ece;
        j["min_ece"] = rep.min_ece;
        j["gap"] = rep.gap;
        *report_json = dup(j.dump(2) + "\n");
    });
}

rk_status rk_pipeline_run(const char* config_path, const char* command, const rk_run_options* options, char** log) {
    return guard([&] {
        need(config_path, "config_path");
        need(command, "command");
        rk::pipeline::RunOptions opts;
        if (options) {
            if (options->has_seed) opts.seed = options->seed;
            if (options->out_dir && *options->out_dir) opts.out_dir = options->out_dir;
            if (options->metrics_path) opts.metrics_path = options->metrics_path;
        }
        const auto stage = rk::pipeline::stage_from_string(command);
        if (!opts.metrics_path.empty() && stage != rk::pipeline::Stage::Checklist) {
            throw rk::ArgumentError("--metrics applies to the checklist subcommand only");
        }
        const auto cfg = rk::pipeline::with_overrides(rk::pipeline::load_config(config_path), opts);
        const auto results = rk::pipeline::run(cfg, stage, opts);
        if (log) {
            std::string text;
            for (const auto& r : results) {
                text += std::string(rk::pipeline::to_string(r.stage)) + ": " + r.summary + "\n";
            }
            *log = dup(text);
        }
    });
}

} // extern "C"
