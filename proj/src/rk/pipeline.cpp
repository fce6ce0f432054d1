#include "rk/pipeline.hpp"

#include "rk/calibrate.hpp"
#include "rk/ckd_epi.hpp"
#include "rk/conformal.hpp"
#include "rk/error.hpp"
#include "rk/ingest.hpp"
#include "rk/metrics.hpp"
#include "rk/models.hpp"
#include "rk/readiness.hpp"
#include "rk/svg.hpp"
#include "rk/text.hpp"
#include "rk/version.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <set>

namespace rk::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array<Stage, 8> kOrder = {Stage::Ingest,    Stage::Train,    Stage::Evaluate,  Stage::Calibrate,
                                         Stage::Conformal, Stage::Subgroup, Stage::Checklist, Stage::Report};

// Paths below the output directory.
namespace path {
constexpr const char* kUciClean = "processed/uci_clean.csv";
constexpr const char* kSplits = "processed/splits.json";
constexpr const char* kStats = "processed/column_stats.txt";
constexpr const char* kSchema = "processed/schema.txt";
constexpr const char* kCohortClean = "processed/cohort_clean.csv";
constexpr const char* kCohortTags = "processed/cohort_tags.csv";
constexpr const char* kVariants = "tables/variant_selection.json";
constexpr const char* kT2 = "tables/T2_calibration.json";
constexpr const char* kT3 = "tables/T3_conformal.json";
constexpr const char* kS3 = "tables/S3_subgroup_ece.json";
} // namespace path

std::string scores_path(const std::string& model, const std::string& variant, const std::string& cohort) {
    return "scores/" + model + "_" + variant + "_" + cohort + ".csv";
}

// Output bookkeeping for one stage.
class Ctx {
public:
    Ctx(const PipelineConfig& cfg, Stage stage) : cfg(cfg), out(cfg.out_path()), stage_(stage) {}

    const PipelineConfig& cfg;
    const fs::path out;

    void write(const std::string& rel, std::string_view content) {
        text::write_file(out / rel, content);
        written_.insert(rel);
    }

    fs::path need(const std::string& rel, Stage prerequisite) const {
        const auto p = out / rel;
        if (!fs::exists(p)) {
            throw MissingArtifact("missing " + p.string() + "; run `readiness-kit " + to_string(prerequisite) +
                                  "` first");
        }
        return p;
    }

    std::string read(const std::string& rel, Stage prerequisite) const { return text::read_file(need(rel, prerequisite)); }

    StageResult finish(std::string summary) {
        StageResult r;
        r.stage = stage_;
        r.outputs.assign(written_.begin(), written_.end());
        std::string list;
        for (const auto& o : r.outputs) list += o + "\n";
        text::write_file(out / ("stages/" + std::string(to_string(stage_)) + ".txt"), list);
        r.summary = std::move(summary);
        return r;
    }

private:
    Stage stage_;
    std::set<std::string> written_;
};

std::string fixed(std::optional<double> v, int decimals = 4) {
    return v ? text::format_fixed(*v, decimals) : std::string("NA");
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_of(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

template <typename F>
std::optional<double> maybe(F&& f) {
    try {
        return f();
    } catch (const UndefinedMetric&) {
        return std::nullopt;
    }
}

json parse_json(const std::string& content, const std::string& what) {
    try {
        return json::parse(content);
    } catch (const json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

// ---------------------------------------------------------------- ingest

struct CohortRaw {
    TabularDataset data;                                    // with CKD-EPI labels
    std::map<std::string, std::vector<std::string>> tags;   // per subgroup key
    std::vector<double> egfr;
};

std::string age_tag(double age, double cutoff) {
    return age < cutoff ? "<" + text::format_double(cutoff) : ">=" + text::format_double(cutoff);
}

CohortRaw read_cohort(const PipelineConfig& cfg, const std::vector<ColumnSpec>& target_schema) {
    const auto file = cfg.resolve(cfg.cohort_path);
    const auto content = text::read_file(file);
    const auto table = text::parse_csv_text(content);
    if (table.empty()) throw ParseError(file.string() + ": CSV has no header row");

    std::vector<ColumnSpec> schema;
    for (const auto& h : table.front()) {
        const std::string name(text::trim(h));
        const auto it = std::find_if(target_schema.begin(), target_schema.end(),
                                     [&](const ColumnSpec& s) { return s.name == name; });
        ColumnSpec spec;
        spec.name = name;
        if (it != target_schema.end()) {
            spec.kind = it->kind;
        } else {
            spec.kind = ColumnKind::Categorical; // carried through as text, dropped by harmonize
        }
        schema.push_back(std::move(spec));
    }
    const auto raw = ingest::parse_csv_text(content, schema, "", "cohort");

    const auto col = [&](const std::string& name) {
        const auto c = raw.column_index(name);
        if (!c) throw SchemaError("cohort CSV lacks column '" + name + "'");
        return *c;
    };
    const auto c_scr = col(cfg.cohort_creatinine);
    const auto c_age = col(cfg.cohort_age);
    const auto c_sex = col(cfg.cohort_sex);

    const auto number = [&](std::size_t r, std::size_t c) {
        const Cell& cell = raw.at(r, c);
        if (const auto* d = std::get_if<double>(&cell)) return *d;
        if (const auto* s = std::get_if<std::string>(&cell)) {
            if (const auto d = text::parse_double(*s)) return *d;
        }
        throw DomainError("cohort row " + std::to_string(r + 1) + " has no numeric '" + raw.columns()[c].name + "'");
    };

    std::vector<ckd_epi::Record> records;
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
        const auto* sex = std::get_if<std::string>(&raw.at(r, c_sex));
        if (!sex) throw DomainError("cohort row " + std::to_string(r + 1) + " has no sex");
        records.push_back({number(r, c_scr), number(r, c_age), ckd_epi::parse_sex(*sex)});
    }

    CohortRaw out;
    for (const auto& rec : records) out.egfr.push_back(ckd_epi::egfr(rec));
    auto labels = ckd_epi::label(records, cfg.egfr_threshold);

    for (const auto& sel : cfg.selectors()) {
        if (out.tags.count(sel.key)) continue;
        std::vector<std::string> values;
        if (sel.key == "age_group") {
            for (const auto& rec : records) values.push_back(age_tag(rec.age_years, cfg.age_cutoff));
        } else {
            const auto c = col(sel.key);
            for (std::size_t r = 0; r < raw.n_rows(); ++r) {
                const Cell& cell = raw.at(r, c);
                if (const auto* s = std::get_if<std::string>(&cell)) values.push_back(text::lower(text::trim(*s)));
                else if (const auto* d = std::get_if<double>(&cell)) values.push_back(text::format_double(*d));
                else values.emplace_back("missing");
            }
        }
        out.tags[sel.key] = std::move(values);
    }
    out.data = TabularDataset(raw.columns(), raw.rows(), std::move(labels), file.filename().string());
    return out;
}

std::string tags_to_csv(const std::map<std::string, std::vector<std::string>>& tags, std::size_t n) {
    std::vector<std::string> header;
    for (const auto& [k, _] : tags) header.push_back(k);
    std::string out = text::csv_row(header);
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::string> row;
        for (const auto& [_, v] : tags) row.push_back(v.at(r));
        out += text::csv_row(row);
    }
    return out;
}

std::map<std::string, std::vector<std::string>> tags_from_csv(const std::string& content) {
    const auto table = text::parse_csv_text(content);
    std::map<std::string, std::vector<std::string>> tags;
    if (table.empty()) return tags;
    for (std::size_t r = 1; r < table.size(); ++r) {
        if (table[r].size() != table[0].size()) throw ParseError("cohort tag file row " + std::to_string(r + 1));
        for (std::size_t c = 0; c < table[0].size(); ++c) tags[table[0][c]].push_back(table[r][c]);
    }
    for (const auto& h : table[0]) tags[h];
    return tags;
}

double fold_prevalence(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    std::size_t pos = 0;
    for (auto i : idx) pos += static_cast<std::size_t>(labels[i]);
    return static_cast<double>(pos) / static_cast<double>(idx.size());
}

StageResult stage_ingest(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const auto raw = ingest::parse_arff(cfg.resolve(cfg.arff_path), {cfg.target});
    if (!raw.label_tokens()) throw SchemaError("ARFF file has no '" + cfg.target + "' attribute");
    const auto labels = ingest::encode_labels(*raw.label_tokens(), cfg.positive_token);
    const auto split = ingest::stratified_split(labels, cfg.test_size, cfg.valid_size, cfg.seed);

    const auto stats = cfg.impute_stats == "full" ? fit_column_stats(raw, "uci:all-rows")
                                                  : fit_column_stats(raw, split.train, "uci:train-fold");
    const auto uci = ingest::encode_binary(ingest::clean_and_impute(raw, stats), cfg.positive_token);
    if (*uci.labels() != labels) throw EncodingError("label encoding changed during cleaning");

    const auto cohort = read_cohort(cfg, uci.columns());
    const auto harmonized = ingest::harmonize(cohort.data, uci.columns(), stats);
    const auto ext = ingest::encode_binary(harmonized.dataset, cfg.positive_token);

    ctx.write(path::kUciClean, ingest::to_csv(uci, "label"));
    ctx.write(path::kSplits, ingest::split_to_json(split));
    ctx.write(path::kStats, ingest::stats_to_text(stats));
    ctx.write(path::kSchema, ingest::schema_to_text(uci.columns()));
    ctx.write(path::kCohortClean, ingest::to_csv(ext, "label"));
    ctx.write(path::kCohortTags, tags_to_csv(cohort.tags, ext.n_rows()));

    std::string egfr = "row_id,egfr,label\n";
    for (std::size_t r = 0; r < cohort.egfr.size(); ++r) {
        egfr += text::csv_row({std::to_string(r), text::format_fixed(cohort.egfr[r], 3),
                               std::to_string((*ext.labels())[r])});
    }
    ctx.write("processed/cohort_egfr.csv", egfr);

    std::string cmp = "column,kind,in_cohort,treatment,fill\n";
    for (const auto& spec : uci.columns()) {
        const bool synth = std::find(harmonized.synthesized.begin(), harmonized.synthesized.end(), spec.name) !=
                           harmonized.synthesized.end();
        const auto* st = stats.find(spec.name);
        const std::string fill = spec.kind == ColumnKind::Continuous ? text::format_double(st->median) : st->mode;
        cmp += text::csv_row({spec.name, to_string(spec.kind), synth ? "0" : "1", synth ? "synthesized" : "shared",
                              fill});
    }
    ctx.write("processed/schema_comparison.csv", cmp);

    json summary;
    summary["uci_rows"] = uci.n_rows();
    summary["uci_features"] = uci.n_cols();
    summary["uci_missing_before"] = raw.count_missing();
    summary["uci_missing_after"] = uci.count_missing();
    summary["impute_stats"] = cfg.impute_stats;
    summary["seed"] = cfg.seed;
    json folds;
    for (const auto& [name, idx] : {std::pair{"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}}) {
        folds[name] = {{"n", idx->size()}, {"prevalence", fold_prevalence(labels, *idx)}};
    }
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    summary["prevalence"] = fold_prevalence(labels, all);
    summary["folds"] = folds;
    summary["cohort_rows"] = ext.n_rows();
    summary["cohort_positives"] = std::count(ext.labels()->begin(), ext.labels()->end(), 1);
    summary["cohort_missing_after"] = ext.count_missing();
    summary["synthesized"] = harmonized.synthesized;
    summary["dropped"] = harmonized.dropped;
    ctx.write("processed/ingest_summary.json", summary.dump(2) + "\n");

    return ctx.finish("uci " + std::to_string(uci.n_rows()) + " rows, folds " + std::to_string(split.train.size()) +
                      "/" + std::to_string(split.valid.size()) + "/" + std::to_string(split.test.size()) +
                      "; cohort " + std::to_string(ext.n_rows()) + " rows, " +
                      std::to_string(summary["cohort_positives"].get<long>()) + " positive, " +
                      std::to_string(harmonized.synthesized.size()) + " synthesized columns");
}

// ---------------------------------------------------------------- loaded state

struct Data {
    std::vector<ColumnSpec> schema;
    TabularDataset uci;
    ingest::SplitIndices split;
    TabularDataset cohort;
    std::map<std::string, std::vector<std::string>> tags;
};

Data load_data(const Ctx& ctx) {
    Data d;
    d.schema = ingest::schema_from_text(ctx.read(path::kSchema, Stage::Ingest));
    d.uci = ingest::parse_csv(ctx.need(path::kUciClean, Stage::Ingest), d.schema, "label");
    d.split = ingest::split_from_json(ctx.read(path::kSplits, Stage::Ingest));
    d.cohort = ingest::parse_csv(ctx.need(path::kCohortClean, Stage::Ingest), d.schema, "label");
    d.tags = tags_from_csv(ctx.read(path::kCohortTags, Stage::Ingest));
    return d;
}

ScoreSet load_scores(const Ctx& ctx, const std::string& model, const std::string& variant, const std::string& cohort,
                     Stage prerequisite) {
    return import_scores(ctx.need(scores_path(model, variant, cohort), prerequisite));
}

// ---------------------------------------------------------------- train

StageResult stage_train(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const auto d = load_data(ctx);
    const auto train = d.uci.subset(d.split.train);
    const auto valid = d.uci.subset(d.split.valid);
    const auto test = d.uci.subset(d.split.test);

    std::string selected = "model,family,param,value,cv_auroc\n";
    std::string summary;
    for (const auto& entry : cfg.models) {
        std::map<std::string, ScoreSet> sets;
        if (entry.native()) {
            const auto family = entry.source == "native-lr" ? models::Family::Logistic : models::Family::GaussianNB;
            const auto& grid = family == models::Family::Logistic ? cfg.lr_grid : cfg.gnb_grid;
            models::LogisticOptions opts;
            opts.standardize = cfg.standardize;
            const auto gs = models::grid_search_cv(train, family, grid, cfg.seed, cfg.cv_folds, opts);
            const double param = gs.candidates[gs.best_index];
            const auto model = models::fit(family, train, param, opts);
            ctx.write("models/" + entry.id + ".model", models::model_to_text(model));
            ctx.write("models/" + entry.id + "_grid.csv", models::grid_to_csv(gs));
            selected += text::csv_row({entry.id, models::to_string(family), models::param_name(family),
                                       text::format_double(param), text::format_fixed(gs.best_cv_score, 4)});
            sets["val"] = models::predict_proba(model, valid, {entry.id, calibrate::kBase, "val"});
            sets["test"] = models::predict_proba(model, test, {entry.id, calibrate::kBase, "test"});
            sets["external"] = models::predict_proba(model, d.cohort, {entry.id, calibrate::kBase, "external"});
        } else {
            const auto dir = cfg.resolve(entry.score_dir());
            for (const char* c : {"val", "test", "external"}) {
                auto s = import_scores(dir / (std::string(c) + ".csv"));
                s.meta = {entry.id, calibrate::kBase, c};
                sets[c] = std::move(s);
            }
            if (sets["external"].size() != d.cohort.n_rows()) {
                throw SchemaError("model " + entry.id + ": external score file has " +
                                  std::to_string(sets["external"].size()) + " rows, cohort has " +
                                  std::to_string(d.cohort.n_rows()));
            }
            selected += text::csv_row({entry.id, "imported", "", "", "NA"});
        }
        // Cohort tags travel with the external scores for the subgroup stage.
        for (const auto& [k, v] : d.tags) {
            if (!sets["external"].tags.count(k)) sets["external"].tags[k] = v;
        }
        for (const auto& [c, s] : sets) ctx.write(scores_path(entry.id, calibrate::kBase, c), scores_to_csv(s));
        summary += (summary.empty() ? "" : ", ") + entry.id + (entry.native() ? " trained" : " imported");
    }
    ctx.write("tables/S1_selected.csv", selected);
    return ctx.finish(summary);
}

// ---------------------------------------------------------------- evaluate

const std::vector<std::string> kReportColumns = {"auroc", "auprc", "f1",  "accuracy", "sensitivity", "specificity",
                                                 "ece",   "mce",   "brier", "brier_skill"};

std::vector<std::optional<double>> report_values(const metrics::MetricReport& r) {
    return {r.auroc, r.auprc, r.f1, r.accuracy, r.sensitivity, r.specificity, r.ece, r.mce, r.brier, r.brier_skill};
}

void write_report_table(Ctx& ctx, const std::string& stem, const std::vector<std::pair<std::string, metrics::MetricReport>>& rows) {
    std::vector<std::string> header = {"model", "n"};
    header.insert(header.end(), kReportColumns.begin(), kReportColumns.end());
    std::string csv = text::csv_row(header);
    json j = json::array();
    for (const auto& [model, r] : rows) {
        const auto vals = report_values(r);
        std::vector<std::string> row = {model, std::to_string(r.n)};
        json m;
        m["model"] = model;
        m["n"] = r.n;
        m["threshold"] = r.threshold;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            row.push_back(fixed(vals[i], 3));
            m[kReportColumns[i]] = opt(vals[i]);
        }
        csv += text::csv_row(row);
        j.push_back(std::move(m));
    }
    ctx.write(stem + ".csv", csv);
    ctx.write(stem + ".json", json{{"models", j}}.dump(2) + "\n");
}

StageResult stage_evaluate(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    std::vector<std::pair<std::string, metrics::MetricReport>> test_rows, val_rows;
    for (const auto& entry : cfg.models) {
        const auto test = load_scores(ctx, entry.id, calibrate::kBase, "test", Stage::Train);
        const auto val = load_scores(ctx, entry.id, calibrate::kBase, "val", Stage::Train);
        test_rows.emplace_back(entry.id, metrics::report(test, cfg.decision_threshold, cfg.ece_bins));
        val_rows.emplace_back(entry.id, metrics::report(val, cfg.decision_threshold, cfg.ece_bins));
    }
    write_report_table(ctx, "tables/T1_uci_test", test_rows);
    write_report_table(ctx, "tables/validation_precalibration", val_rows);
    std::string summary;
    for (const auto& [m, r] : test_rows) summary += (summary.empty() ? "" : ", ") + m + " test AUROC " + fixed(r.auroc, 3);
    return ctx.finish(summary);
}

// ---------------------------------------------------------------- calibrate

json ci_json(const std::optional<metrics::BootstrapCI>& ci) {
    if (!ci) return json(nullptr);
    return json{{"point", ci->point}, {"lo", ci->lo}, {"hi", ci->hi}, {"n_resamples", ci->n_resamples},
                {"redraws", ci->redraws}, {"level", ci->level}, {"seed", ci->seed}};
}

std::optional<metrics::BootstrapCI> maybe_ci(const PipelineConfig& cfg, const ScoreSet& s, metrics::MetricKind k) {
    try {
        return metrics::bootstrap_ci(s, k, cfg.bootstrap_resamples, cfg.bootstrap_level, cfg.seed, cfg.ece_bins);
    } catch (const UndefinedMetric&) {
        return std::nullopt;
    }
}

svg::Annotations inset(const ScoreSet& s, std::size_t bins, const std::string& variant) {
    const auto rb = metrics::reliability_bins(s, bins);
    return {{"Variant", variant},
            {"ECE", text::format_fixed(metrics::ece(rb, s.size()), 3)},
            {"MCE", text::format_fixed(metrics::mce(rb), 3)},
            {"Brier", text::format_fixed(metrics::brier(s), 3)},
            {"AUROC", fixed(maybe([&] { return metrics::auroc(s); }), 3)}};
}

StageResult stage_calibrate(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    std::string sel_csv = "model,base,platt,isotonic,chosen\n";
    std::string t2_csv =
        "model,variant,uci_ece,uci_ece_lo,uci_ece_hi,external_ece,external_ece_lo,external_ece_hi,external_auroc,"
        "external_auroc_lo,external_auroc_hi,calibration_drift\n";
    json sel_json, t2_json = json::array();
    std::string summary;

    for (const auto& entry : cfg.models) {
        const auto val = load_scores(ctx, entry.id, calibrate::kBase, "val", Stage::Train);
        std::map<std::string, ScoreSet> test, external;
        test[calibrate::kBase] = load_scores(ctx, entry.id, calibrate::kBase, "test", Stage::Train);
        external[calibrate::kBase] = load_scores(ctx, entry.id, calibrate::kBase, "external", Stage::Train);

        const std::vector<calibrate::Calibrator> cals = {calibrate::fit_platt(val), calibrate::fit_isotonic(val)};
        for (const auto& cal : cals) {
            const std::string v = calibrate::variant_name(cal);
            ctx.write("calibrators/" + entry.id + "_" + v + ".cal", calibrate::calibrator_to_text(cal));
            test[v] = calibrate::apply(cal, test[calibrate::kBase]);
            external[v] = calibrate::apply(cal, external[calibrate::kBase]);
            ctx.write(scores_path(entry.id, v, "test"), scores_to_csv(test[v]));
            ctx.write(scores_path(entry.id, v, "external"), scores_to_csv(external[v]));
        }

        const auto sel = calibrate::select_best_variant(test, cfg.ece_bins);
        sel_csv += text::csv_row({entry.id, text::format_fixed(sel.test_ece.at(calibrate::kBase), 4),
                                  text::format_fixed(sel.test_ece.at(calibrate::kPlatt), 4),
                                  text::format_fixed(sel.test_ece.at(calibrate::kIsotonic), 4), sel.chosen});
        sel_json[entry.id] = {{"chosen", sel.chosen}, {"test_ece", sel.test_ece}, {"rationale", sel.rationale}};

        const auto& t = test.at(sel.chosen);
        const auto& e = external.at(sel.chosen);
        const auto uci_ci = maybe_ci(cfg, t, metrics::MetricKind::Ece);
        const auto ext_ci = maybe_ci(cfg, e, metrics::MetricKind::Ece);
        const auto auc_ci = maybe_ci(cfg, e, metrics::MetricKind::Auroc);
        const double uci_ece = metrics::ece(t, cfg.ece_bins);
        const double ext_ece = metrics::ece(e, cfg.ece_bins);
        const auto ext_auc = maybe([&] { return metrics::auroc(e); });
        const double drift = calibrate::calibration_drift(t, e, cfg.ece_bins);

        const auto lo = [](const auto& ci) { return ci ? std::optional<double>(ci->lo) : std::nullopt; };
        const auto hi = [](const auto& ci) { return ci ? std::optional<double>(ci->hi) : std::nullopt; };
        t2_csv += text::csv_row({entry.id, sel.chosen, fixed(uci_ece, 3), fixed(lo(uci_ci), 3), fixed(hi(uci_ci), 3),
                                 fixed(ext_ece, 3), fixed(lo(ext_ci), 3), fixed(hi(ext_ci), 3), fixed(ext_auc, 3),
                                 fixed(lo(auc_ci), 3), fixed(hi(auc_ci), 3), fixed(drift, 3)});
        t2_json.push_back({{"model", entry.id},
                           {"variant", sel.chosen},
                           {"uci_ece", uci_ece},
                           {"uci_ece_ci", ci_json(uci_ci)},
                           {"external_ece", ext_ece},
                           {"external_ece_ci", ci_json(ext_ci)},
                           {"external_auroc", opt(ext_auc)},
                           {"external_auroc_ci", ci_json(auc_ci)},
                           {"calibration_drift", drift}});

        for (const auto& [cohort, s] : {std::pair<std::string, const ScoreSet*>{"uci_test", &t}, {"external", &e}}) {
            const auto bins = metrics::reliability_bins(*s, cfg.ece_bins);
            const auto stem = entry.id + "_" + cohort;
            ctx.write("tables/reliability_" + stem + ".csv", metrics::bins_to_csv(bins));
            ctx.write("figures/reliability_" + stem + ".svg",
                      svg::reliability_svg(bins, inset(*s, cfg.ece_bins, sel.chosen),
                                           entry.id + " (" + sel.chosen + "), " +
                                               (cohort == "uci_test" ? "internal test" : "external cohort")));
        }
        summary += (summary.empty() ? "" : ", ") + entry.id + " " + sel.chosen + " ECE " + fixed(uci_ece, 3) + "->" +
                   fixed(ext_ece, 3);
    }
    ctx.write("tables/variant_selection.csv", sel_csv);
    ctx.write(path::kVariants, sel_json.dump(2) + "\n");
    ctx.write("tables/T2_calibration.csv", t2_csv);
    ctx.write(path::kT2, json{{"ece_bins", cfg.ece_bins}, {"models", t2_json}}.dump(2) + "\n");
    return ctx.finish(summary);
}

// ---------------------------------------------------------------- conformal

StageResult stage_conformal(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    std::string csv =
        "model,q_hat,n_cal,degenerate,internal_coverage,internal_avg_set,internal_singleton,internal_empty,"
        "external_coverage,external_avg_set,external_singleton,external_empty,coverage_drift\n";
    json rows = json::array();
    std::string summary;
    for (const auto& entry : cfg.models) {
        const auto val = load_scores(ctx, entry.id, calibrate::kBase, "val", Stage::Train);
        const auto test = load_scores(ctx, entry.id, calibrate::kBase, "test", Stage::Train);
        const auto ext = load_scores(ctx, entry.id, calibrate::kBase, "external", Stage::Train);
        const auto m = conformal::fit_conformal(val, cfg.alpha);
        const auto in = conformal::coverage_report(m, test);
        const auto ex = conformal::coverage_report(m, ext);
        const double drift = conformal::coverage_drift(in, ex);
        ctx.write("conformal/" + entry.id + ".conformal", conformal::model_to_text(m));
        ctx.write("conformal/" + entry.id + "_test_sets.csv", conformal::sets_to_csv(m, test));
        ctx.write("conformal/" + entry.id + "_external_sets.csv", conformal::sets_to_csv(m, ext));
        csv += text::csv_row({entry.id, text::format_fixed(m.q_hat, 4), std::to_string(m.n_cal),
                              m.degenerate ? "1" : "0", fixed(in.coverage, 3), fixed(in.avg_set_size, 3),
                              fixed(in.singleton_rate, 3), fixed(in.empty_rate, 3), fixed(ex.coverage, 3),
                              fixed(ex.avg_set_size, 3), fixed(ex.singleton_rate, 3), fixed(ex.empty_rate, 3),
                              fixed(drift, 3)});
        const auto rep = [](const conformal::CoverageReport& r) {
            return json{{"n", r.n},
                        {"coverage", r.coverage},
                        {"avg_set_size", r.avg_set_size},
                        {"singleton_rate", r.singleton_rate},
                        {"empty_rate", r.empty_rate},
                        {"ambiguous_rate", r.ambiguous_rate}};
        };
        rows.push_back({{"model", entry.id},
                        {"alpha", m.alpha},
                        {"q_hat", m.q_hat},
                        {"n_cal", m.n_cal},
                        {"degenerate", m.degenerate},
                        {"internal", rep(in)},
                        {"external", rep(ex)},
                        {"coverage_drift", drift}});
        summary += (summary.empty() ? "" : ", ") + entry.id + " coverage " + fixed(in.coverage, 3) + "->" +
                   fixed(ex.coverage, 3);
    }
    ctx.write("tables/T3_conformal.csv", csv);
    ctx.write(path::kT3, json{{"alpha", cfg.alpha}, {"score", "lac"}, {"models", rows}}.dump(2) + "\n");
    return ctx.finish(summary);
}

// ---------------------------------------------------------------- subgroup

std::string chosen_variant(const Ctx& ctx, const std::string& model) {
    const auto j = parse_json(ctx.read(path::kVariants, Stage::Calibrate), path::kVariants);
    if (!j.contains(model)) throw MissingArtifact("no variant selection for " + model + "; run `readiness-kit calibrate` first");
    return j.at(model).at("chosen").get<std::string>();
}

StageResult stage_subgroup(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const auto selectors = cfg.selectors();
    std::string csv = "model,variant,group,n,ece,excluded\n";
    std::string gap_csv = "model,variant,max_ece,min_ece,gap\n";
    json rows = json::array();
    std::string summary;
    for (const auto& entry : cfg.models) {
        const auto variant = chosen_variant(ctx, entry.id);
        auto ext = load_scores(ctx, entry.id, variant, "external", Stage::Calibrate);
        json groups = json::array();
        std::optional<readiness::SubgroupReport> rep;
        try {
            rep = readiness::subgroup_ece(ext, selectors, cfg.subgroup_bins, cfg.min_group_size);
        } catch (const UndefinedMetric&) {
        }
        if (rep) {
            for (const auto& g : rep->groups) {
                csv += text::csv_row({entry.id, variant, g.name, std::to_string(g.n), fixed(g.ece, 3),
                                      g.excluded ? "1" : "0"});
                groups.push_back({{"group", g.name}, {"n", g.n}, {"ece", opt(g.ece)}, {"excluded", g.excluded}});
            }
            gap_csv += text::csv_row({entry.id, variant, fixed(rep->max_ece, 3), fixed(rep->min_ece, 3),
                                      fixed(rep->gap, 3)});
        } else {
            gap_csv += text::csv_row({entry.id, variant, "NA", "NA", "NA"});
        }
        rows.push_back({{"model", entry.id},
                        {"variant", variant},
                        {"groups", groups},
                        {"max_ece", rep ? json(rep->max_ece) : json(nullptr)},
                        {"min_ece", rep ? json(rep->min_ece) : json(nullptr)},
                        {"gap", rep ? json(rep->gap) : json(nullptr)}});
        summary += (summary.empty() ? "" : ", ") + entry.id + " gap " +
                   fixed(rep ? std::optional<double>(rep->gap) : std::nullopt, 3);
    }
    ctx.write("tables/S3_subgroup_ece.csv", csv);
    ctx.write("tables/S3_gap.csv", gap_csv);
    ctx.write(path::kS3,
              json{{"n_bins", cfg.subgroup_bins}, {"min_group_size", cfg.min_group_size}, {"models", rows}}.dump(2) +
                  "\n");
    return ctx.finish(summary);
}

// ---------------------------------------------------------------- checklist

const json& model_row(const json& table, const std::string& model, const char* file, Stage prerequisite) {
    for (const auto& m : table.at("models")) {
        if (m.at("model") == model) return m;
    }
    throw MissingArtifact(std::string(file) + " has no row for " + model + "; run `readiness-kit " +
                          to_string(prerequisite) + "` first");
}

void write_checklist(Ctx& ctx, const std::vector<readiness::ChecklistReport>& reports,
                     const std::vector<readiness::CriterionSpec>& specs) {
    ctx.write("tables/T4_checklist.csv", readiness::checklist_to_csv(reports, specs));
    ctx.write("tables/T4_checklist.json", readiness::checklist_to_json(reports, specs));
    ctx.write("tables/T4_heatmap.csv", readiness::heatmap_csv(reports));
    ctx.write("figures/checklist_heatmap.svg", svg::checklist_heatmap_svg(reports));
}

std::string totals(const std::vector<readiness::ChecklistReport>& reports) {
    std::string s;
    for (const auto& r : reports) s += (s.empty() ? "" : ", ") + r.model + " " + std::to_string(r.total) + "/" +
                                       std::to_string(r.max_total);
    return s;
}

StageResult stage_checklist(Ctx& ctx, const std::string& metrics_path) {
    const auto& cfg = ctx.cfg;
    const auto specs = cfg.criteria();
    std::vector<readiness::ChecklistReport> reports;
    if (!metrics_path.empty()) {
        for (const auto& ni : readiness::inputs_from_json(text::read_file(metrics_path))) {
            reports.push_back(readiness::score_checklist(ni.inputs, specs, ni.model, ni.variant));
        }
        write_checklist(ctx, reports, specs);
        return ctx.finish("published metrics: " + totals(reports));
    }
    const auto t2 = parse_json(ctx.read(path::kT2, Stage::Calibrate), path::kT2);
    const auto t3 = parse_json(ctx.read(path::kT3, Stage::Conformal), path::kT3);
    const auto s3 = parse_json(ctx.read(path::kS3, Stage::Subgroup), path::kS3);
    std::string inputs_csv = "model,variant";
    for (const auto& s : specs) inputs_csv += "," + s.metric;
    inputs_csv += "\n";
    for (const auto& entry : cfg.models) {
        const auto& c = model_row(t2, entry.id, path::kT2, Stage::Calibrate);
        const auto& k = model_row(t3, entry.id, path::kT3, Stage::Conformal);
        const auto& g = model_row(s3, entry.id, path::kS3, Stage::Subgroup);
        readiness::CriterionInputs in;
        in["external_auroc"] = opt_of(c, "external_auroc");
        in["external_ece"] = opt_of(c, "external_ece");
        in["calibration_drift"] = opt_of(c, "calibration_drift");
        in["external_coverage"] = opt_of(k.at("external"), "coverage");
        in["coverage_drift"] = opt_of(k, "coverage_drift");
        in["external_singleton_rate"] = opt_of(k.at("external"), "singleton_rate");
        in["subgroup_ece_gap"] = opt_of(g, "gap");
        in["transparency"] = cfg.transparency ? 1.0 : 0.0;
        const auto variant = c.at("variant").get<std::string>();
        reports.push_back(readiness::score_checklist(in, specs, entry.id, variant));
        inputs_csv += entry.id + "," + variant;
        for (const auto& s : specs) inputs_csv += "," + fixed(in[s.metric], 6);
        inputs_csv += "\n";
    }
    ctx.write("tables/T4_inputs.csv", inputs_csv);
    write_checklist(ctx, reports, specs);
    return ctx.finish(totals(reports));
}

// ---------------------------------------------------------------- report

std::string timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) {
        if (const auto v = text::parse_int(e)) t = static_cast<std::time_t>(*v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string digest_of(const json& stages) {
    std::string canon;
    for (const auto& [stage, files] : stages.items()) {
        for (const auto& f : files) {
            canon += stage + "\t" + f.at("path").get<std::string>() + "\t" + f.at("sha256").get<std::string>() + "\n";
        }
    }
    return sha256_hex(canon);
}

StageResult stage_report(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    json stages = json::object();
    std::size_t n_files = 0;
    for (Stage s : kOrder) {
        if (s == Stage::Report) continue;
        const auto list = ctx.out / ("stages/" + std::string(to_string(s)) + ".txt");
        if (!fs::exists(list)) continue;
        json files = json::array();
        for (const auto& rel : text::split(text::read_file(list), '\n')) {
            if (rel.empty()) continue;
            const auto content = text::read_file(ctx.out / rel);
            files.push_back({{"path", rel}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
            ++n_files;
        }
        stages[to_string(s)] = std::move(files);
    }
    if (stages.empty()) throw MissingArtifact("no stage outputs under " + ctx.out.string() + "; run `readiness-kit ingest` first");

    json config = json::object();
    for (const auto& line : text::split(config_to_text(cfg), '\n')) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find(" = ");
        config[line.substr(0, eq)] = line.substr(eq + 3);
    }
    json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kVersion;
    manifest["config"] = config;
    manifest["stages"] = stages;
    manifest["digest"] = digest_of(stages);
    manifest["generated_at"] = timestamp();
    // Not registered as a stage output: the manifest describes the others.
    text::write_file(ctx.out / "manifest.json", manifest.dump(2) + "\n");
    return ctx.finish(std::to_string(n_files) + " files, digest " + manifest["digest"].get<std::string>());
}

StageResult run_one(const PipelineConfig& cfg, Stage stage, const RunOptions& opts) {
    Ctx ctx(cfg, stage);
    switch (stage) {
    case Stage::Ingest: return stage_ingest(ctx);
    case Stage::Train: return stage_train(ctx);
    case Stage::Evaluate: return stage_evaluate(ctx);
    case Stage::Calibrate: return stage_calibrate(ctx);
    case Stage::Conformal: return stage_conformal(ctx);
    case Stage::Subgroup: return stage_subgroup(ctx);
    case Stage::Checklist: return stage_checklist(ctx, opts.metrics_path);
    case Stage::Report: return stage_report(ctx);
    case Stage::All: break;
    }
    throw ArgumentError("stage 'all' is not a single stage");
}

} // namespace

const char* to_string(Stage s) noexcept {
    switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Train: return "train";
    case Stage::Evaluate: return "evaluate";
    case Stage::Calibrate: return "calibrate";
    case Stage::Conformal: return "conformal";
    case Stage::Subgroup: return "subgroup";
    case Stage::Checklist: return "checklist";
    case Stage::Report: return "report";
    case Stage::All: return "all";
    }
    return "?";
}

Stage stage_from_string(const std::string& name) {
    for (Stage s : kOrder) {
        if (name == to_string(s)) return s;
    }
    if (name == "all") return Stage::All;
    throw ArgumentError("unknown subcommand '" + name + "'");
}

PipelineConfig with_overrides(PipelineConfig cfg, const RunOptions& opts) {
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out_dir) {
        // Command-line paths are relative to the working directory.
        cfg.out_dir = fs::absolute(*opts.out_dir).lexically_normal().string();
    }
    cfg.validate();
    return cfg;
}

std::vector<StageResult> run(const PipelineConfig& cfg, Stage stage, const RunOptions& opts) {
    std::vector<StageResult> out;
    if (stage != Stage::All) {
        out.push_back(run_one(cfg, stage, opts));
        return out;
    }
    for (Stage s : kOrder) out.push_back(run_one(cfg, s, opts));
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

std::string manifest_digest(const fs::path& manifest_path) {
    const auto j = parse_json(text::read_file(manifest_path), manifest_path.string());
    return j.at("digest").get<std::string>();
}

} // namespace rk::pipeline
