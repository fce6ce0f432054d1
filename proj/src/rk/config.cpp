#include "rk/config.hpp"

#include "rk/error.hpp"
#include "rk/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rk::pipeline {

std::string ModelEntry::score_dir() const {
    constexpr std::string_view prefix = "scores:";
    if (source.rfind(prefix, 0) != 0) return {};
    return source.substr(prefix.size());
}

std::filesystem::path PipelineConfig::resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path;
    return base_dir / path;
}

std::vector<readiness::CriterionSpec> PipelineConfig::criteria() const {
    auto specs = readiness::default_criteria();
    for (auto& s : specs) {
        if (const auto it = thresholds.find(s.id); it != thresholds.end()) s.threshold = it->second;
    }
    return specs;
}

std::vector<readiness::GroupSelector> PipelineConfig::selectors() const {
    std::vector<readiness::GroupSelector> out;
    for (const auto& s : subgroups) out.push_back(readiness::GroupSelector::parse(s));
    return out;
}

void PipelineConfig::validate() const {
    const auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (ece_bins < 1 || subgroup_bins < 1) fail("bin counts must be at least 1");
    if (cv_folds < 2) fail("cv_folds must be at least 2");
    if (bootstrap_resamples < 1) fail("bootstrap_resamples must be at least 1");
    if (!(bootstrap_level > 0.0 && bootstrap_level < 1.0)) fail("bootstrap_level must lie in (0, 1)");
    if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0)) fail("decision_threshold must lie in [0, 1]");
    if (impute_stats != "train" && impute_stats != "full") fail("impute_stats must be 'train' or 'full'");
    if (!(egfr_threshold > 0.0) || !std::isfinite(egfr_threshold)) fail("egfr_threshold must be positive");
    if (!std::isfinite(age_cutoff)) fail("age_cutoff must be finite");
    if (target.empty() || positive_token.empty()) fail("target and positive_token must be set");
    if (models.empty()) fail("at least one model is required");
    std::set<std::string> ids;
    for (const auto& m : models) {
        if (m.id.empty() || m.id.find_first_of(",/\\ \t") != std::string::npos) fail("bad model id '" + m.id + "'");
        if (!ids.insert(m.id).second) fail("duplicate model id '" + m.id + "'");
        if (!m.native() && m.score_dir().empty()) {
            fail("model." + m.id + " must be native-lr, native-gnb or scores:<dir>");
        }
    }
    if (lr_grid.empty() || gnb_grid.empty()) fail("hyperparameter grids must be non-empty");
    for (double c : lr_grid) {
        if (!(c > 0.0) || !std::isfinite(c)) fail("lr_grid values must be positive");
    }
    for (double v : gnb_grid) {
        if (!(v >= 0.0) || !std::isfinite(v)) fail("gnb_grid values must be non-negative");
    }
    for (const auto& [id, t] : thresholds) {
        if (id.size() != 2 || id[0] != 'C' || id[1] < '1' || id[1] > '7') fail("unknown criterion '" + id + "'");
        if (!std::isfinite(t)) fail("threshold." + id + " must be finite");
    }
    for (const auto& s : subgroups) readiness::GroupSelector::parse(s);
}

namespace {

std::vector<std::string> list_of(const std::string& v) {
    std::vector<std::string> out;
    for (const auto& item : text::split(v, ',')) {
        const auto t = text::trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

std::string join(const std::vector<double>& items) {
    std::string out;
    for (double d : items) out += (out.empty() ? "" : ",") + text::format_double(d);
    return out;
}

} // namespace

PipelineConfig parse_config(std::string_view content, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    std::map<std::string, std::string> sources;
    std::vector<std::string> model_ids;
    bool models_set = false;
    std::set<std::string> seen;

    std::size_t line_no = 0;
    for (auto line : text::split(content, '\n')) {
        ++line_no;
        const auto t = std::string(text::trim(line));
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const auto where = "config line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const auto key = std::string(text::trim(std::string_view(t).substr(0, eq)));
        const auto value = std::string(text::trim(std::string_view(t).substr(eq + 1)));
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");

        const auto num = [&]() {
            const auto d = text::parse_double(value);
            if (!d) throw ConfigError(where + key + " expects a number, got '" + value + "'");
            return *d;
        };
        const auto count = [&]() {
            const auto i = text::parse_int(value);
            if (!i || *i < 0) throw ConfigError(where + key + " expects a non-negative integer, got '" + value + "'");
            return static_cast<std::size_t>(*i);
        };
        const auto flag = [&]() {
            const auto l = text::lower(value);
            if (l == "true" || l == "1" || l == "yes") return true;
            if (l == "false" || l == "0" || l == "no") return false;
            throw ConfigError(where + key + " expects true or false, got '" + value + "'");
        };
        const auto numbers = [&]() {
            std::vector<double> out;
            for (const auto& item : list_of(value)) {
                const auto d = text::parse_double(item);
                if (!d) throw ConfigError(where + key + " has non-numeric entry '" + item + "'");
                out.push_back(*d);
            }
            return out;
        };

        if (key == "arff_path") cfg.arff_path = value;
        else if (key == "cohort_path") cfg.cohort_path = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "seed") {
            const auto i = text::parse_int(value);
            if (!i || *i < 0) throw ConfigError(where + "seed expects a non-negative integer");
            cfg.seed = static_cast<std::uint64_t>(*i);
        } else if (key == "alpha") cfg.alpha = num();
        else if (key == "ece_bins") cfg.ece_bins = count();
        else if (key == "subgroup_bins") cfg.subgroup_bins = count();
        else if (key == "min_group_size") cfg.min_group_size = count();
        else if (key == "test_size") cfg.test_size = count();
        else if (key == "valid_size") cfg.valid_size = count();
        else if (key == "cv_folds") cfg.cv_folds = count();
        else if (key == "bootstrap_resamples") cfg.bootstrap_resamples = count();
        else if (key == "bootstrap_level") cfg.bootstrap_level = num();
        else if (key == "decision_threshold") cfg.decision_threshold = num();
        else if (key == "impute_stats") cfg.impute_stats = value;
        else if (key == "standardize") cfg.standardize = flag();
        else if (key == "target") cfg.target = value;
        else if (key == "positive_token") cfg.positive_token = value;
        else if (key == "egfr_threshold") cfg.egfr_threshold = num();
        else if (key == "cohort_creatinine") cfg.cohort_creatinine = value;
        else if (key == "cohort_age") cfg.cohort_age = value;
        else if (key == "cohort_sex") cfg.cohort_sex = value;
        else if (key == "age_cutoff") cfg.age_cutoff = num();
        else if (key == "transparency") cfg.transparency = flag();
        else if (key == "subgroups") cfg.subgroups = list_of(value);
        else if (key == "models") {
            model_ids = list_of(value);
            models_set = true;
        } else if (key.rfind("model.", 0) == 0) sources[key.substr(6)] = value;
        else if (key == "lr_grid") cfg.lr_grid = numbers();
        else if (key == "gnb_grid") cfg.gnb_grid = numbers();
        else if (key.rfind("threshold.", 0) == 0) cfg.thresholds[key.substr(10)] = num();
        else throw ConfigError(where + "unknown key '" + key + "'");
    }

    if (models_set) {
        cfg.models.clear();
        for (const auto& id : model_ids) {
            const auto it = sources.find(id);
            if (it == sources.end()) throw ConfigError("model '" + id + "' is listed but has no model." + id + " entry");
            cfg.models.push_back({id, it->second});
        }
        for (const auto& [id, _] : sources) {
            if (std::find(model_ids.begin(), model_ids.end(), id) == model_ids.end()) {
                throw ConfigError("model." + id + " is set but '" + id + "' is not in models");
            }
        }
    } else if (!sources.empty()) {
        throw ConfigError("model.<ID> entries require a models list");
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string content;
    try {
        content = text::read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_config(content, path.parent_path());
}

std::string config_to_text(const PipelineConfig& c) {
    std::string out = "# readiness-kit pipeline config\n";
    const auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    const auto b = [](bool f) { return std::string(f ? "true" : "false"); };
    kv("arff_path", c.arff_path);
    kv("cohort_path", c.cohort_path);
    kv("out_dir", c.out_dir);
    kv("seed", std::to_string(c.seed));
    kv("alpha", text::format_double(c.alpha));
    kv("ece_bins", std::to_string(c.ece_bins));
    kv("subgroup_bins", std::to_string(c.subgroup_bins));
    kv("min_group_size", std::to_string(c.min_group_size));
    kv("test_size", std::to_string(c.test_size));
    kv("valid_size", std::to_string(c.valid_size));
    kv("cv_folds", std::to_string(c.cv_folds));
    kv("bootstrap_resamples", std::to_string(c.bootstrap_resamples));
    kv("bootstrap_level", text::format_double(c.bootstrap_level));
    kv("decision_threshold", text::format_double(c.decision_threshold));
    kv("impute_stats", c.impute_stats);
    kv("standardize", b(c.standardize));
    kv("target", c.target);
    kv("positive_token", c.positive_token);
    kv("egfr_threshold", text::format_double(c.egfr_threshold));
    kv("cohort_creatinine", c.cohort_creatinine);
    kv("cohort_age", c.cohort_age);
    kv("cohort_sex", c.cohort_sex);
    kv("age_cutoff", text::format_double(c.age_cutoff));
    kv("transparency", b(c.transparency));
    kv("subgroups", join(c.subgroups));
    std::vector<std::string> ids;
    for (const auto& m : c.models) ids.push_back(m.id);
    kv("models", join(ids));
    for (const auto& m : c.models) kv("model." + m.id, m.source);
    kv("lr_grid", join(c.lr_grid));
    kv("gnb_grid", join(c.gnb_grid));
    for (const auto& [id, t] : c.thresholds) kv("threshold." + id, text::format_double(t));
    return out;
}

} // namespace rk::pipeline
