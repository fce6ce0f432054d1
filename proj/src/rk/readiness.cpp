#include "rk/readiness.hpp"

#include "rk/error.hpp"
#include "rk/metrics.hpp"
#include "rk/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace rk::readiness {

GroupSelector GroupSelector::parse(const std::string& s) {
    const auto t = std::string(text::trim(s));
    const auto eq = t.find('=');
    GroupSelector g;
    if (eq == std::string::npos) {
        g.key = t;
    } else {
        g.key = std::string(text::trim(std::string_view(t).substr(0, eq)));
        g.value = std::string(text::trim(std::string_view(t).substr(eq + 1)));
    }
    if (g.key.empty() || (g.value && g.value->empty())) throw ConfigError("malformed subgroup selector '" + s + "'");
    return g;
}

std::string GroupSelector::to_string() const { return value ? key + "=" + *value : key; }

SubgroupReport subgroup_ece(const ScoreSet& s, const std::vector<GroupSelector>& selectors, std::size_t n_bins,
                            std::size_t min_n) {
    SubgroupReport rep;
    rep.n_bins = n_bins;
    rep.min_group_size = min_n;
    for (const auto& sel : selectors) {
        const auto it = s.tags.find(sel.key);
        if (it == s.tags.end()) throw SchemaError("score set has no '" + sel.key + "' tag");
        const auto& tag = it->second;
        std::vector<std::string> levels;
        if (sel.value) {
            levels.push_back(*sel.value);
        } else {
            std::set<std::string> distinct(tag.begin(), tag.end());
            levels.assign(distinct.begin(), distinct.end());
        }
        for (const auto& level : levels) {
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < tag.size(); ++i) {
                if (text::iequals(text::trim(tag[i]), level)) rows.push_back(i);
            }
            SubgroupEce g;
            g.name = sel.key + "=" + level;
            g.n = rows.size();
            g.excluded = g.n < min_n || g.n == 0;
            if (!g.excluded) g.ece = metrics::ece(s.subset(rows), n_bins);
            rep.groups.push_back(std::move(g));
        }
    }
    bool any = false;
    for (const auto& g : rep.groups) {
        if (!g.ece) continue;
        if (!any) {
            rep.max_ece = rep.min_ece = *g.ece;
            any = true;
        } else {
            rep.max_ece = std::max(rep.max_ece, *g.ece);
            rep.min_ece = std::min(rep.min_ece, *g.ece);
        }
    }
    if (!any) throw UndefinedMetric("no subgroup reaches the minimum size of " + std::to_string(min_n));
    rep.gap = rep.max_ece - rep.min_ece;
    return rep;
}

const char* to_string(Direction d) noexcept { return d == Direction::AtLeast ? "at_least" : "at_most"; }

const char* to_string(Status s) noexcept {
    switch (s) {
    case Status::Pass: return "PASS";
    case Status::Marginal: return "MARGINAL";
    case Status::Fail: return "FAIL";
    }
    return "FAIL";
}

char letter(Status s) noexcept { return to_string(s)[0]; }

int points(Status s) noexcept {
    switch (s) {
    case Status::Pass: return 2;
    case Status::Marginal: return 1;
    case Status::Fail: return 0;
    }
    return 0;
}

std::vector<CriterionSpec> default_criteria() {
    using D = Direction;
    return {
        {"C1", "Discrimination adequacy: AUROC on the external cohort", "external_auroc", D::AtLeast, 0.85, 0.20,
         "external", false, false},
        {"C2", "Calibration adequacy: ECE on the external cohort", "external_ece", D::AtMost, 0.10, 0.20, "external",
         false, false},
        {"C3", "Calibration stability: absolute calibration drift", "calibration_drift", D::AtMost, 0.05, 0.20,
         "both", true, false},
        {"C4", "Uncertainty coverage: conformal coverage on the external cohort", "external_coverage", D::AtLeast,
         0.90, 0.20, "external", false, false},
        {"C5", "Coverage stability: absolute coverage drift", "coverage_drift", D::AtMost, 0.05, 0.20, "both", true,
         false},
        {"C6", "Prediction interpretability: singleton rate on the external cohort", "external_singleton_rate",
         D::AtLeast, 0.70, 0.20, "external", false, false},
        {"C7", "Subgroup calibration equity: maximum subgroup ECE gap", "subgroup_ece_gap", D::AtMost, 0.05, 0.20,
         "external", false, false},
        {"C8", "Transparency: code and pipeline publicly available", "transparency", D::AtLeast, 1.0, 0.20, "n/a",
         false, true},
    };
}

CriterionResult evaluate_criterion(const CriterionSpec& spec, std::optional<double> value) {
    CriterionResult r;
    r.id = spec.id;
    if (value && !std::isfinite(*value)) value.reset();
    if (spec.automatic) {
        r.value = value;
        r.status = value && *value != 0.0 ? Status::Pass : Status::Fail;
        if (r.status == Status::Fail) r.reason = "flag '" + spec.metric + "' not set";
    } else if (!value) {
        r.status = Status::Fail;
        r.reason = "input '" + spec.metric + "' is missing or undefined";
    } else {
        const double v = spec.absolute ? std::abs(*value) : *value;
        r.value = v;
        const double t = spec.threshold;
        if (spec.direction == Direction::AtLeast) {
            r.status = v >= t ? Status::Pass : v >= t * (1.0 - spec.marginal_factor) ? Status::Marginal : Status::Fail;
        } else {
            r.status = v <= t ? Status::Pass : v <= t * (1.0 + spec.marginal_factor) ? Status::Marginal : Status::Fail;
        }
    }
    r.points = points(r.status);
    return r;
}

ChecklistReport score_checklist(const CriterionInputs& inputs, const std::vector<CriterionSpec>& specs,
                                const std::string& model, const std::string& variant) {
    ChecklistReport rep;
    rep.model = model;
    rep.variant = variant;
    rep.max_total = 2 * static_cast<int>(specs.size());
    for (const auto& spec : specs) {
        const auto it = inputs.find(spec.metric);
        auto res = evaluate_criterion(spec, it == inputs.end() ? std::nullopt : it->second);
        rep.total += res.points;
        rep.criteria.push_back(std::move(res));
    }
    return rep;
}

std::string checklist_to_json(const std::vector<ChecklistReport>& reports, const std::vector<CriterionSpec>& specs) {
    nlohmann::ordered_json root;
    root["models"] = nlohmann::ordered_json::array();
    for (const auto& rep : reports) {
        nlohmann::ordered_json m;
        m["model"] = rep.model;
        m["variant"] = rep.variant;
        m["criteria"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < rep.criteria.size(); ++i) {
            const auto& c = rep.criteria[i];
            const auto& spec = specs.at(i);
            nlohmann::ordered_json j;
            j["id"] = c.id;
            j["description"] = spec.description;
            j["value"] = c.value ? nlohmann::ordered_json(*c.value) : nlohmann::ordered_json(nullptr);
            j["threshold"] = spec.threshold;
            j["direction"] = to_string(spec.direction);
            j["status"] = to_string(c.status);
            j["points"] = c.points;
            j["cohort"] = spec.cohort;
            if (!c.reason.empty()) j["reason"] = c.reason;
            m["criteria"].push_back(std::move(j));
        }
        m["total"] = rep.total;
        m["max_total"] = rep.max_total;
        root["models"].push_back(std::move(m));
    }
    return root.dump(2) + "\n";
}

std::string checklist_to_csv(const std::vector<ChecklistReport>& reports, const std::vector<CriterionSpec>& specs) {
    std::vector<std::string> header = {"model", "variant"};
    for (const auto& s : specs) header.push_back(s.id);
    header.push_back("total");
    std::string out = text::csv_row(header);
    for (const auto& rep : reports) {
        std::vector<std::string> row = {rep.model, rep.variant};
        for (const auto& c : rep.criteria) row.emplace_back(1, letter(c.status));
        row.push_back(std::to_string(rep.total) + "/" + std::to_string(rep.max_total));
        out += text::csv_row(row);
    }
    return out;
}

std::string heatmap_csv(const std::vector<ChecklistReport>& reports) {
    std::string out = "model,criterion,status,points\n";
    for (const auto& rep : reports) {
        for (const auto& c : rep.criteria) {
            out += text::csv_row({rep.model, c.id, to_string(c.status), std::to_string(c.points)});
        }
    }
    return out;
}

std::vector<NamedInputs> inputs_from_json(std::string_view json) {
    std::vector<NamedInputs> out;
    try {
        const auto root = nlohmann::json::parse(json);
        for (const auto& m : root.at("models")) {
            NamedInputs ni;
            ni.model = m.at("model").get<std::string>();
            ni.variant = m.value("variant", "");
            for (const auto& [key, v] : m.items()) {
                if (key == "model" || key == "variant") continue;
                if (v.is_boolean()) ni.inputs[key] = v.get<bool>() ? 1.0 : 0.0;
                else if (v.is_number()) ni.inputs[key] = v.get<double>();
                else if (v.is_null()) ni.inputs[key] = std::nullopt;
                else if (!v.is_string()) throw ParseError("metric '" + key + "' must be a number, boolean or null");
            }
            out.push_back(std::move(ni));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metrics JSON: ") + e.what());
    }
    return out;
}

} // namespace rk::readiness
