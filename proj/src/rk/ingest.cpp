#include "rk/ingest.hpp"

#include "rk/error.hpp"
#include "rk/rng.hpp"
#include "rk/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <set>

namespace rk::ingest {

namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string unquote(std::string_view s) {
    s = text::trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

// Splits on commas outside single or double quotes; fields are unquoted and trimmed.
std::vector<std::string> split_quoted(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    char quote = 0;
    for (char c : s) {
        if (quote) {
            cur.push_back(c);
            if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
            cur.push_back(c);
        } else if (c == ',') {
            out.push_back(unquote(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(unquote(cur));
    return out;
}

struct ArffAttribute {
    std::string name;
    bool nominal = false;
    bool numeric_nominal = false;
    std::vector<std::string> values;
};

ArffAttribute parse_attribute(std::string_view rest, std::size_t line) {
    rest = text::trim(rest);
    ArffAttribute attr;
    std::size_t name_end = 0;
    if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
        const auto close = rest.find(rest.front(), 1);
        if (close == std::string_view::npos) throw ParseError(line_prefix(line) + "unterminated quoted attribute name");
        attr.name = std::string(rest.substr(1, close - 1));
        name_end = close + 1;
    } else {
        name_end = rest.find_first_of(" \t{");
        if (name_end == std::string_view::npos) throw ParseError(line_prefix(line) + "attribute has no type");
        attr.name = std::string(rest.substr(0, name_end));
    }
    if (attr.name.empty()) throw ParseError(line_prefix(line) + "empty attribute name");
    const auto type = text::trim(rest.substr(name_end));
    if (type.empty()) throw ParseError(line_prefix(line) + "attribute '" + attr.name + "' has no type");
    if (type.front() == '{') {
        if (type.back() != '}') throw ParseError(line_prefix(line) + "unterminated nominal set for '" + attr.name + "'");
        attr.nominal = true;
        for (auto& v : split_quoted(type.substr(1, type.size() - 2))) {
            if (v.empty()) continue;
            attr.values.push_back(std::move(v));
        }
        if (attr.values.empty()) throw ParseError(line_prefix(line) + "empty nominal set for '" + attr.name + "'");
        attr.numeric_nominal = std::all_of(attr.values.begin(), attr.values.end(),
                                           [](const std::string& v) { return text::parse_double(v).has_value(); });
        return attr;
    }
    const std::string kw = text::lower(type);
    if (kw == "numeric" || kw == "real" || kw == "integer") return attr;
    throw ParseError(line_prefix(line) + "unsupported attribute type '" + std::string(type) + "' for '" +
                     attr.name + "'");
}

} // namespace

TabularDataset parse_arff_text(std::string_view content, const ArffOptions& opts, const std::string& source) {
    std::vector<ArffAttribute> attrs;
    bool saw_relation = false;
    bool in_data = false;
    std::optional<std::size_t> target_idx;

    std::vector<ColumnSpec> columns;
    std::vector<std::size_t> attr_to_col;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> tokens;

    const auto finish_header = [&](std::size_t line) {
        if (!saw_relation) throw ParseError(line_prefix(line) + "@data before @relation");
        if (attrs.empty()) throw ParseError(line_prefix(line) + "@data before any @attribute");
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            if (text::iequals(attrs[i].name, opts.target)) {
                if (!attrs[i].nominal) throw ParseError("target attribute '" + attrs[i].name + "' must be nominal");
                target_idx = i;
                attr_to_col.push_back(static_cast<std::size_t>(-1));
                continue;
            }
            ColumnSpec spec;
            spec.name = attrs[i].name;
            if (attrs[i].nominal && !attrs[i].numeric_nominal) {
                spec.kind = ColumnKind::Categorical;
                spec.categories = attrs[i].values;
            }
            attr_to_col.push_back(columns.size());
            columns.push_back(std::move(spec));
        }
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        const auto raw = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '%') {
            if (nl == content.size()) break;
            continue;
        }
        if (!in_data) {
            if (line.front() != '@') throw ParseError(line_prefix(line_no) + "expected a header keyword");
            const auto sp = line.find_first_of(" \t");
            const std::string kw = text::lower(line.substr(0, sp));
            const auto rest = sp == std::string_view::npos ? std::string_view{} : line.substr(sp);
            if (kw == "@relation") {
                saw_relation = true;
            } else if (kw == "@attribute") {
                if (!saw_relation) throw ParseError(line_prefix(line_no) + "@attribute before @relation");
                attrs.push_back(parse_attribute(rest, line_no));
            } else if (kw == "@data") {
                finish_header(line_no);
                in_data = true;
            } else {
                throw ParseError(line_prefix(line_no) + "unknown header keyword '" + kw + "'");
            }
            if (nl == content.size()) break;
            continue;
        }

        if (line.front() == '{') throw ParseError(line_prefix(line_no) + "sparse ARFF rows are not supported");
        auto fields = split_quoted(line);
        while (fields.size() > attrs.size() && fields.back().empty()) fields.pop_back();
        if (fields.size() != attrs.size()) {
            throw ParseError(line_prefix(line_no) + "expected " + std::to_string(attrs.size()) + " values, found " +
                             std::to_string(fields.size()));
        }
        std::vector<Cell> row(columns.size());
        for (std::size_t a = 0; a < attrs.size(); ++a) {
            const std::string& v = fields[a];
            const auto& attr = attrs[a];
            const bool missing = v == "?" || v.empty();
            if (!missing && attr.nominal &&
                std::find(attr.values.begin(), attr.values.end(), v) == attr.values.end()) {
                throw ParseError(line_prefix(line_no) + "unknown nominal value '" + v + "' for attribute '" +
                                 attr.name + "'");
            }
            if (target_idx && a == *target_idx) {
                if (missing) throw ParseError(line_prefix(line_no) + "missing class value");
                tokens.push_back(v);
                continue;
            }
            Cell& cell = row[attr_to_col[a]];
            if (missing) {
                cell = Missing{};
            } else if (!attr.nominal || attr.numeric_nominal) {
                const auto d = text::parse_double(v);
                if (!d) throw ParseError(line_prefix(line_no) + "non-numeric value '" + v + "' for '" + attr.name + "'");
                cell = *d;
            } else {
                cell = v;
            }
        }
        rows.push_back(std::move(row));
        if (nl == content.size()) break;
    }
    if (!in_data) throw ParseError("missing @data section");

    std::optional<std::vector<std::string>> label_tokens;
    if (target_idx) label_tokens = std::move(tokens);
    return TabularDataset(std::move(columns), std::move(rows), std::nullopt, source, std::move(label_tokens));
}

TabularDataset parse_arff(const std::filesystem::path& path, const ArffOptions& opts) {
    return parse_arff_text(text::read_file(path), opts, path.filename().string());
}

TabularDataset parse_csv_text(std::string_view content, const std::vector<ColumnSpec>& schema,
                              const std::string& label_column, const std::string& source) {
    const auto table = text::parse_csv_text(content);
    if (table.empty()) throw ParseError("CSV has no header row");
    const auto& header = table.front();

    std::vector<std::optional<std::size_t>> col_of_field(header.size());
    std::optional<std::size_t> label_field;
    std::set<std::string> seen;
    for (std::size_t f = 0; f < header.size(); ++f) {
        const std::string name(text::trim(header[f]));
        if (!seen.insert(name).second) throw SchemaError("duplicate CSV column '" + name + "'");
        if (!label_column.empty() && name == label_column) {
            label_field = f;
            continue;
        }
        const auto it = std::find_if(schema.begin(), schema.end(), [&](const ColumnSpec& s) { return s.name == name; });
        if (it == schema.end()) throw SchemaError("unexpected CSV column '" + name + "'");
        col_of_field[f] = static_cast<std::size_t>(it - schema.begin());
    }
    for (const auto& s : schema) {
        if (!seen.count(s.name)) throw SchemaError("missing required column '" + s.name + "'");
    }
    if (!label_column.empty() && !label_field) throw SchemaError("missing label column '" + label_column + "'");

    std::vector<std::vector<Cell>> rows;
    std::optional<std::vector<int>> labels;
    if (label_field) labels.emplace();
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& fields = table[r];
        const std::size_t line = r + 1;
        if (fields.size() != header.size()) {
            throw ParseError(line_prefix(line) + "expected " + std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        std::vector<Cell> row(schema.size());
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const auto v = text::trim(fields[f]);
            if (label_field && f == *label_field) {
                const auto y = text::parse_int(v);
                if (!y || (*y != 0 && *y != 1)) {
                    throw ParseError(line_prefix(line) + "label must be 0 or 1, found '" + std::string(v) + "'");
                }
                labels->push_back(static_cast<int>(*y));
                continue;
            }
            const std::size_t c = *col_of_field[f];
            if (v.empty()) continue; // Missing
            if (schema[c].kind == ColumnKind::Continuous) {
                const auto d = text::parse_double(v);
                if (!d) {
                    throw ParseError(line_prefix(line) + "non-numeric token '" + std::string(v) + "' in column '" +
                                     schema[c].name + "'");
                }
                row[c] = *d;
            } else if (schema[c].encoded() && (v == "0" || v == "1")) {
                row[c] = v == "1" ? 1.0 : 0.0; // already encoded
            } else {
                row[c] = fields[f];
            }
        }
        rows.push_back(std::move(row));
    }
    return TabularDataset(schema, std::move(rows), std::move(labels), source);
}

TabularDataset parse_csv(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema,
                         const std::string& label_column) {
    return parse_csv_text(text::read_file(path), schema, label_column, path.filename().string());
}

std::string to_csv(const TabularDataset& ds, const std::string& label_column) {
    auto header = ds.column_names();
    if (ds.labels()) header.push_back(label_column);
    std::string out = text::csv_row(header);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        std::vector<std::string> fields;
        fields.reserve(header.size());
        for (const auto& cell : ds.rows()[r]) {
            if (const auto* d = std::get_if<double>(&cell)) {
                fields.push_back(text::format_double(*d));
            } else if (const auto* s = std::get_if<std::string>(&cell)) {
                fields.push_back(*s);
            } else {
                fields.emplace_back();
            }
        }
        if (ds.labels()) fields.push_back(std::to_string((*ds.labels())[r]));
        out += text::csv_row(fields);
    }
    return out;
}

void write_csv(const TabularDataset& ds, const std::filesystem::path& path, const std::string& label_column) {
    text::write_file(path, to_csv(ds, label_column));
}

TabularDataset clean_and_impute(const TabularDataset& ds, const ColumnStats& stats) {
    std::vector<const ColumnStat*> per_col;
    for (const auto& spec : ds.columns()) {
        const auto* st = stats.find(spec.name);
        if (!st) throw SchemaError("no imputation statistics for column '" + spec.name + "'");
        if (st->kind != spec.kind) throw SchemaError("statistics for column '" + spec.name + "' have the wrong kind");
        per_col.push_back(st);
    }
    auto rows = ds.rows();
    for (auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto& spec = ds.columns()[c];
            Cell& cell = row[c];
            if (auto* s = std::get_if<std::string>(&cell)) {
                const auto t = text::trim(*s);
                if (t.empty()) {
                    cell = Missing{};
                } else if (spec.kind == ColumnKind::Continuous) {
                    const auto d = text::parse_double(t);
                    if (!d) throw SchemaError("non-numeric token '" + std::string(t) + "' in column '" + spec.name + "'");
                    cell = *d;
                } else if (t.size() != s->size()) {
                    cell = std::string(t);
                }
            }
            if (!is_missing(cell)) continue;
            if (spec.kind == ColumnKind::Continuous) {
                cell = per_col[c]->median;
            } else if (const auto it = spec.category_map.find(per_col[c]->mode); it != spec.category_map.end()) {
                cell = static_cast<double>(it->second);
            } else {
                cell = per_col[c]->mode;
            }
        }
    }
    std::optional<std::vector<std::string>> tokens;
    if (ds.label_tokens()) {
        tokens.emplace();
        for (const auto& t : *ds.label_tokens()) tokens->emplace_back(text::trim(t));
    }
    return TabularDataset(ds.columns(), std::move(rows), ds.labels(), ds.provenance(), std::move(tokens));
}

std::vector<int> encode_labels(std::span<const std::string> tokens, const std::string& positive) {
    std::set<std::string> distinct;
    for (const auto& t : tokens) distinct.emplace(text::trim(t));
    if (distinct.size() > 2) {
        std::string list;
        for (const auto& t : distinct) list += (list.empty() ? "" : ", ") + t;
        throw EncodingError("class column has more than two tokens: " + list);
    }
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& raw : tokens) {
        const auto t = text::trim(raw);
        if (text::iequals(t, positive) || t == "1") {
            out.push_back(1);
        } else if (t == "0" || distinct.size() <= 2) {
            out.push_back(0);
        }
    }
    // Two tokens, neither matching the positive token, would silently map all to 0.
    if (distinct.size() == 2 && std::none_of(distinct.begin(), distinct.end(), [&](const std::string& t) {
            return text::iequals(t, positive) || t == "1";
        })) {
        throw EncodingError("positive class token '" + positive + "' not found among class tokens");
    }
    return out;
}

namespace {

constexpr std::array<std::string_view, 8> kPositiveTokens = {"yes", "present", "abnormal", "poor",
                                                             "true", "ckd",     "y",        "1"};
constexpr std::array<std::string_view, 8> kNegativeTokens = {"no", "notpresent", "normal", "good",
                                                             "false", "notckd",  "n",      "0"};

int known_polarity(const std::string& token) {
    const std::string t = text::lower(token);
    if (std::find(kPositiveTokens.begin(), kPositiveTokens.end(), t) != kPositiveTokens.end()) return 1;
    if (std::find(kNegativeTokens.begin(), kNegativeTokens.end(), t) != kNegativeTokens.end()) return 0;
    return -1;
}

// Clinical "finding present" tokens map to 1. Unknown pairs fall back to sorted
// order (first -> 0).
std::map<std::string, int> build_category_map(const std::set<std::string>& tokens) {
    std::map<std::string, int> map;
    if (tokens.empty()) return {{"0", 0}, {"1", 1}};
    std::vector<std::string> sorted(tokens.begin(), tokens.end());
    std::vector<int> pol;
    for (const auto& t : sorted) pol.push_back(known_polarity(t));
    if (sorted.size() == 1) {
        map[sorted[0]] = pol[0] == 1 ? 1 : 0;
        return map;
    }
    if (pol[0] >= 0 && pol[1] >= 0 && pol[0] != pol[1]) {
        map[sorted[0]] = pol[0];
        map[sorted[1]] = pol[1];
    } else if (pol[0] >= 0 && pol[1] < 0) {
        map[sorted[0]] = pol[0];
        map[sorted[1]] = 1 - pol[0];
    } else if (pol[1] >= 0 && pol[0] < 0) {
        map[sorted[1]] = pol[1];
        map[sorted[0]] = 1 - pol[1];
    } else {
        map[sorted[0]] = 0;
        map[sorted[1]] = 1;
    }
    return map;
}

} // namespace

TabularDataset encode_binary(const TabularDataset& ds, const std::string& positive_label) {
    auto columns = ds.columns();
    auto rows = ds.rows();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        auto& spec = columns[c];
        if (spec.kind != ColumnKind::Categorical) continue;
        std::set<std::string> tokens;
        for (const auto& v : spec.categories) tokens.emplace(text::trim(v));
        for (const auto& row : rows) {
            if (const auto* s = std::get_if<std::string>(&row[c])) tokens.emplace(text::trim(*s));
        }
        tokens.erase("");
        if (spec.category_map.empty()) {
            if (tokens.size() > 2) {
                std::string list;
                for (const auto& t : tokens) list += (list.empty() ? "" : ", ") + t;
                throw EncodingError("column '" + spec.name + "' has more than two categories: " + list);
            }
            spec.category_map = build_category_map(tokens);
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Cell& cell = rows[r][c];
            if (const auto* s = std::get_if<std::string>(&cell)) {
                const std::string t(text::trim(*s));
                if (t.empty()) {
                    cell = Missing{};
                    continue;
                }
                const auto it = spec.category_map.find(t);
                if (it == spec.category_map.end()) {
                    throw EncodingError("column '" + spec.name + "' has token '" + t + "' outside its category map");
                }
                cell = static_cast<double>(it->second);
            } else if (const auto* d = std::get_if<double>(&cell)) {
                if (*d != 0.0 && *d != 1.0) {
                    throw EncodingError("column '" + spec.name + "' holds non-binary number " + text::format_double(*d));
                }
            }
        }
    }
    auto labels = ds.labels();
    if (!labels && ds.label_tokens()) labels = encode_labels(*ds.label_tokens(), positive_label);
    return TabularDataset(std::move(columns), std::move(rows), std::move(labels), ds.provenance(),
                          ds.label_tokens());
}

namespace {

// Draws `k` rows from `pool` stratified by label; returns the drawn rows.
std::vector<std::size_t> stratified_draw(const std::vector<std::size_t>& pool, std::span<const int> labels,
                                         std::size_t k, Rng& rng) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i : pool) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    const std::size_t n = pool.size();

    std::array<std::size_t, 2> take{};
    std::array<std::size_t, 2> rem{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t prod = k * by_class[c].size();
        take[c] = prod / n;
        rem[c] = prod % n;
        assigned += take[c];
    }
    // Largest remainder; ties go to the lower class id.
    std::array<std::size_t, 2> order = {0, 1};
    if (rem[1] > rem[0]) order = {1, 0};
    for (std::size_t i = 0; assigned < k; ++i) {
        ++take[order[i % 2]];
        ++assigned;
    }

    std::vector<std::size_t> drawn;
    for (std::size_t c = 0; c < 2; ++c) {
        auto members = by_class[c];
        rng.shuffle(std::span<std::size_t>(members));
        drawn.insert(drawn.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take[c]));
    }
    std::sort(drawn.begin(), drawn.end());
    return drawn;
}

std::vector<std::size_t> difference(const std::vector<std::size_t>& all, const std::vector<std::size_t>& drop) {
    std::vector<std::size_t> out;
    std::set_difference(all.begin(), all.end(), drop.begin(), drop.end(), std::back_inserter(out));
    return out;
}

} // namespace

SplitIndices stratified_split(std::span<const int> labels, std::size_t test_count, std::size_t valid_count,
                              std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (test_count + valid_count >= n) {
        throw SplitError("fold sizes " + std::to_string(test_count) + " + " + std::to_string(valid_count) +
                         " leave no training rows out of " + std::to_string(n));
    }
    std::array<std::size_t, 2> counts{};
    for (int y : labels) {
        if (y != 0 && y != 1) throw SplitError("labels must be 0 or 1");
        ++counts[static_cast<std::size_t>(y)];
    }
    const std::size_t folds = 1 + (test_count > 0) + (valid_count > 0);
    for (std::size_t c = 0; c < 2; ++c) {
        if (counts[c] > 0 && counts[c] < folds) {
            throw SplitError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                             " rows, fewer than the " + std::to_string(folds) + " folds requested");
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;

    SplitIndices out;
    out.seed = seed;
    out.test = stratified_draw(all, labels, test_count, rng);
    const auto remainder = difference(all, out.test);
    out.valid = stratified_draw(remainder, labels, valid_count, rng);
    out.train = difference(remainder, out.valid);
    return out;
}

SplitIndices stratified_split_fractions(std::span<const int> labels, double test_frac, double valid_frac,
                                        std::uint64_t seed) {
    const auto ok = [](double f) { return f >= 0.0 && f < 1.0; };
    if (!ok(test_frac) || !ok(valid_frac) || test_frac + valid_frac >= 1.0) {
        throw ArgumentError("split fractions must lie in [0, 1) and sum below 1");
    }
    const double n = static_cast<double>(labels.size());
    return stratified_split(labels, static_cast<std::size_t>(std::llround(test_frac * n)),
                            static_cast<std::size_t>(std::llround(valid_frac * n)), seed);
}

std::string split_to_json(const SplitIndices& split) {
    nlohmann::ordered_json j;
    j["seed"] = split.seed;
    j["train"] = split.train;
    j["valid"] = split.valid;
    j["test"] = split.test;
    return j.dump() + "\n";
}

SplitIndices split_from_json(std::string_view json) {
    try {
        const auto j = nlohmann::json::parse(json);
        SplitIndices s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.train = j.at("train").get<std::vector<std::size_t>>();
        s.valid = j.at("valid").get<std::vector<std::size_t>>();
        s.test = j.at("test").get<std::vector<std::size_t>>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("split file: ") + e.what());
    }
}

namespace {

constexpr std::string_view kStatsHeader = "# readiness-kit column stats v1";
constexpr std::string_view kSchemaHeader = "# readiness-kit schema v1";

void check_field(const std::string& s, const std::string& what) {
    if (s.find_first_of("\t\n\r") != std::string::npos) {
        throw ArgumentError(what + " '" + s + "' contains a tab or newline");
    }
}

std::vector<std::string> content_lines(std::string_view content, std::string_view header) {
    std::vector<std::string> lines;
    bool first = true;
    for (auto& l : text::split(content, '\n')) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (first) {
            if (l != header) throw ParseError("expected header '" + std::string(header) + "'");
            first = false;
            continue;
        }
        if (!l.empty()) lines.push_back(std::move(l));
    }
    if (first) throw ParseError("empty file, expected '" + std::string(header) + "'");
    return lines;
}

std::pair<std::string, std::string> key_value(const std::string& field, std::size_t line) {
    const auto eq = field.rfind('=');
    if (eq == std::string::npos) throw ParseError(line_prefix(line) + "expected key=value, found '" + field + "'");
    return {field.substr(0, eq), field.substr(eq + 1)};
}

double need_double(const std::string& v, std::size_t line) {
    const auto d = text::parse_double(v);
    if (!d) throw ParseError(line_prefix(line) + "not a number: '" + v + "'");
    return *d;
}

} // namespace

std::string stats_to_text(const ColumnStats& stats) {
    std::string out(kStatsHeader);
    out += "\nfit_source=" + stats.fit_source + "\n";
    for (const auto& name : stats.order) {
        check_field(name, "column name");
        const auto& st = stats.by_column.at(name);
        out += name;
        out += '\t';
        out += to_string(st.kind);
        if (st.kind == ColumnKind::Continuous) {
            out += "\tmedian=" + text::format_double17(st.median) + "\tmean=" + text::format_double17(st.mean) +
                   "\tstd=" + text::format_double17(st.std);
        } else {
            check_field(st.mode, "mode token");
            out += "\tmode=" + st.mode;
        }
        out += '\n';
    }
    return out;
}

ColumnStats stats_from_text(std::string_view content) {
    ColumnStats stats;
    const auto lines = content_lines(content, kStatsHeader);
    std::size_t line = 1;
    for (const auto& l : lines) {
        ++line;
        if (l.rfind("fit_source=", 0) == 0) {
            stats.fit_source = l.substr(11);
            continue;
        }
        const auto fields = text::split(l, '\t');
        if (fields.size() < 2) throw ParseError(line_prefix(line) + "malformed stats line");
        ColumnStat st;
        if (fields[1] == "continuous") {
            st.kind = ColumnKind::Continuous;
        } else if (fields[1] == "categorical") {
            st.kind = ColumnKind::Categorical;
        } else {
            throw ParseError(line_prefix(line) + "unknown column kind '" + fields[1] + "'");
        }
        for (std::size_t i = 2; i < fields.size(); ++i) {
            const auto [k, v] = key_value(fields[i], line);
            if (k == "median") st.median = need_double(v, line);
            else if (k == "mean") st.mean = need_double(v, line);
            else if (k == "std") st.std = need_double(v, line);
            else if (k == "mode") st.mode = v;
            else throw ParseError(line_prefix(line) + "unknown stats key '" + k + "'");
        }
        if (st.std < 0.0) throw ParseError(line_prefix(line) + "negative std");
        stats.order.push_back(fields[0]);
        stats.by_column[fields[0]] = st;
    }
    return stats;
}

std::string schema_to_text(const std::vector<ColumnSpec>& schema) {
    std::string out(kSchemaHeader);
    out += '\n';
    for (const auto& spec : schema) {
        check_field(spec.name, "column name");
        out += spec.name;
        out += '\t';
        out += to_string(spec.kind);
        for (const auto& [tok, v] : spec.category_map) {
            check_field(tok, "category token");
            out += '\t' + tok + '=' + std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<ColumnSpec> schema_from_text(std::string_view content) {
    std::vector<ColumnSpec> schema;
    const auto lines = content_lines(content, kSchemaHeader);
    std::size_t line = 1;
    for (const auto& l : lines) {
        ++line;
        const auto fields = text::split(l, '\t');
        if (fields.size() < 2) throw ParseError(line_prefix(line) + "malformed schema line");
        ColumnSpec spec;
        spec.name = fields[0];
        if (fields[1] == "continuous") {
            spec.kind = ColumnKind::Continuous;
        } else if (fields[1] == "categorical") {
            spec.kind = ColumnKind::Categorical;
        } else {
            throw ParseError(line_prefix(line) + "unknown column kind '" + fields[1] + "'");
        }
        for (std::size_t i = 2; i < fields.size(); ++i) {
            const auto [tok, v] = key_value(fields[i], line);
            if (v != "0" && v != "1") throw ParseError(line_prefix(line) + "category code must be 0 or 1");
            spec.category_map[tok] = v == "1" ? 1 : 0;
            spec.categories.push_back(tok);
        }
        schema.push_back(std::move(spec));
    }
    return schema;
}

Harmonized harmonize(const TabularDataset& external, const std::vector<ColumnSpec>& target_schema,
                     const ColumnStats& stats) {
    Harmonized out;
    std::vector<std::optional<std::size_t>> source(target_schema.size());
    for (std::size_t t = 0; t < target_schema.size(); ++t) {
        source[t] = external.column_index(target_schema[t].name);
        if (!source[t]) {
            if (!stats.find(target_schema[t].name)) {
                throw SchemaError("no imputation statistics for column '" + target_schema[t].name + "'");
            }
            out.synthesized.push_back(target_schema[t].name);
        }
    }
    for (const auto& spec : external.columns()) {
        if (std::none_of(target_schema.begin(), target_schema.end(),
                         [&](const ColumnSpec& s) { return s.name == spec.name; })) {
            out.dropped.push_back(spec.name);
        }
    }

    std::vector<std::vector<Cell>> rows(external.n_rows(), std::vector<Cell>(target_schema.size()));
    for (std::size_t r = 0; r < external.n_rows(); ++r) {
        for (std::size_t t = 0; t < target_schema.size(); ++t) {
            const auto& spec = target_schema[t];
            Cell& cell = rows[r][t];
            if (!source[t]) continue; // left missing, imputed below as a constant column
            const Cell& in = external.at(r, *source[t]);
            if (spec.kind == ColumnKind::Continuous) {
                if (const auto* s = std::get_if<std::string>(&in)) {
                    const auto t_tok = text::trim(*s);
                    if (t_tok.empty()) continue;
                    const auto d = text::parse_double(t_tok);
                    if (!d) throw SchemaError("non-numeric token '" + *s + "' in column '" + spec.name + "'");
                    cell = *d;
                } else {
                    cell = in;
                }
            } else {
                const auto* d = std::get_if<double>(&in);
                if (d && !(spec.encoded() && (*d == 0.0 || *d == 1.0))) {
                    cell = text::format_double(*d);
                } else {
                    cell = in;
                }
            }
        }
    }
    TabularDataset assembled(target_schema, std::move(rows), external.labels(), external.provenance() + "+harmonized",
                             external.label_tokens());
    out.dataset = clean_and_impute(assembled, stats);
    return out;
}

} // namespace rk::ingest
