#include "rk/scoreset.hpp"

#include "rk/error.hpp"
#include "rk/text.hpp"

#include <cmath>

namespace rk {

std::size_t ScoreSet::positives() const noexcept {
    std::size_t n = 0;
    for (int y : labels) n += y == 1;
    return n;
}

double ScoreSet::prevalence() const {
    if (labels.empty()) throw UndefinedMetric("prevalence of an empty score set");
    return static_cast<double>(positives()) / static_cast<double>(labels.size());
}

void ScoreSet::validate() const {
    if (probs.size() != labels.size()) {
        throw ArgumentError("score set has " + std::to_string(probs.size()) + " probabilities but " +
                            std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
            throw ArgumentError("probability " + text::format_double(probs[i]) + " at row " + std::to_string(i) +
                                " is outside [0,1]");
        }
        if (labels[i] != 0 && labels[i] != 1) {
            throw ArgumentError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                " is not 0 or 1");
        }
    }
    for (const auto& [key, values] : tags) {
        if (values.size() != probs.size()) throw ArgumentError("tag '" + key + "' has the wrong length");
    }
}

ScoreSet ScoreSet::subset(std::span<const std::size_t> rows) const {
    ScoreSet out;
    out.meta = meta;
    out.probs.reserve(rows.size());
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) {
        out.probs.push_back(probs.at(r));
        out.labels.push_back(labels.at(r));
    }
    for (const auto& [key, values] : tags) {
        auto& dst = out.tags[key];
        for (std::size_t r : rows) dst.push_back(values.at(r));
    }
    return out;
}

ScoreSet make_scoreset(std::vector<double> probs, std::vector<int> labels, ScoreMeta meta) {
    ScoreSet s{std::move(probs), std::move(labels), {}, std::move(meta)};
    s.validate();
    return s;
}

std::string scores_to_csv(const ScoreSet& s) {
    s.validate();
    std::string out;
    if (!s.meta.model.empty() || !s.meta.variant.empty() || !s.meta.cohort.empty()) {
        out += "# model=" + s.meta.model + ",variant=" + s.meta.variant + ",cohort=" + s.meta.cohort + "\n";
    }
    std::vector<std::string> header = {"prob", "label"};
    for (const auto& [key, _] : s.tags) header.push_back(key);
    out += text::csv_row(header);
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::vector<std::string> row = {text::format_double17(s.probs[i]), std::to_string(s.labels[i])};
        for (const auto& [_, values] : s.tags) row.push_back(values[i]);
        out += text::csv_row(row);
    }
    return out;
}

ScoreSet scores_from_csv(std::string_view content) {
    ScoreSet s;
    if (content.rfind("#", 0) == 0) {
        const auto nl = content.find('\n');
        const auto meta_line = text::trim(content.substr(1, nl == std::string_view::npos ? content.size() : nl - 1));
        for (const auto& kv : text::split(meta_line, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string k(text::trim(std::string_view(kv).substr(0, eq)));
            const std::string v(text::trim(std::string_view(kv).substr(eq + 1)));
            if (k == "model") s.meta.model = v;
            else if (k == "variant") s.meta.variant = v;
            else if (k == "cohort") s.meta.cohort = v;
        }
        content = nl == std::string_view::npos ? std::string_view{} : content.substr(nl + 1);
    }
    const auto table = text::parse_csv_text(content);
    if (table.empty()) throw ParseError("score file has no header");
    const auto& header = table.front();
    std::optional<std::size_t> prob_col, label_col;
    std::vector<std::pair<std::size_t, std::string>> tag_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string h(text::trim(header[i]));
        if (h == "prob") prob_col = i;
        else if (h == "label") label_col = i;
        else tag_cols.emplace_back(i, h);
    }
    if (!prob_col || !label_col) throw SchemaError("score file needs 'prob' and 'label' columns");
    for (const auto& [_, name] : tag_cols) s.tags[name];

    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        if (row.size() != header.size()) throw ParseError("score file row " + std::to_string(r + 1) + " has the wrong arity");
        const auto p = text::parse_double(row[*prob_col]);
        if (!p) throw ParseError("score file row " + std::to_string(r + 1) + ": bad probability '" + row[*prob_col] + "'");
        const auto y = text::parse_int(row[*label_col]);
        if (!y) throw ParseError("score file row " + std::to_string(r + 1) + ": bad label '" + row[*label_col] + "'");
        s.probs.push_back(*p);
        s.labels.push_back(static_cast<int>(*y));
        for (const auto& [c, name] : tag_cols) s.tags[name].push_back(row[c]);
    }
    s.validate();
    return s;
}

void export_scores(const ScoreSet& s, const std::filesystem::path& path) { text::write_file(path, scores_to_csv(s)); }

ScoreSet import_scores(const std::filesystem::path& path) { return scores_from_csv(text::read_file(path)); }

} // namespace rk
