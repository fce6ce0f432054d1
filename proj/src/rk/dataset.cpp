#include "rk/dataset.hpp"

#include "rk/error.hpp"
#include "rk/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rk {

const char* to_string(ColumnKind kind) noexcept {
    return kind == ColumnKind::Continuous ? "continuous" : "categorical";
}

TabularDataset::TabularDataset(std::vector<ColumnSpec> columns, std::vector<std::vector<Cell>> rows,
                               std::optional<std::vector<int>> labels, std::string provenance,
                               std::optional<std::vector<std::string>> label_tokens)
    : columns_(std::move(columns)), rows_(std::move(rows)), labels_(std::move(labels)),
      label_tokens_(std::move(label_tokens)), provenance_(std::move(provenance)) {
    std::set<std::string> names;
    for (const auto& c : columns_) {
        if (!names.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() != columns_.size()) {
            throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(rows_[r].size()) +
                              " cells, expected " + std::to_string(columns_.size()));
        }
    }
    if (labels_) {
        if (labels_->size() != rows_.size()) throw SchemaError("label vector length differs from row count");
        for (int y : *labels_) {
            if (y != 0 && y != 1) throw SchemaError("labels must be 0 or 1");
        }
    }
    if (label_tokens_ && label_tokens_->size() != rows_.size()) {
        throw SchemaError("class token vector length differs from row count");
    }
}

std::optional<std::size_t> TabularDataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> TabularDataset::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

std::size_t TabularDataset::count_missing() const noexcept {
    std::size_t n = 0;
    for (const auto& row : rows_) n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), is_missing));
    return n;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> indices) const {
    std::vector<std::vector<Cell>> rows;
    rows.reserve(indices.size());
    std::optional<std::vector<int>> labels;
    std::optional<std::vector<std::string>> tokens;
    if (labels_) labels.emplace();
    if (label_tokens_) tokens.emplace();
    for (std::size_t i : indices) {
        rows.push_back(rows_.at(i));
        if (labels_) labels->push_back((*labels_)[i]);
        if (label_tokens_) tokens->push_back((*label_tokens_)[i]);
    }
    return TabularDataset(columns_, std::move(rows), std::move(labels), provenance_, std::move(tokens));
}

std::vector<double> TabularDataset::numeric_matrix() const {
    std::vector<double> out;
    out.reserve(rows_.size() * columns_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const auto* v = std::get_if<double>(&rows_[r][c]);
            if (!v) {
                throw SchemaError("column '" + columns_[c].name + "' row " + std::to_string(r) +
                                  " is not numeric; impute and encode before modelling");
            }
            out.push_back(*v);
        }
    }
    return out;
}

const ColumnStat* ColumnStats::find(const std::string& name) const {
    const auto it = by_column.find(name);
    return it == by_column.end() ? nullptr : &it->second;
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw DomainError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::string token_of(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return std::string(text::trim(*s));
    return text::format_double(std::get<double>(c));
}

} // namespace

ColumnStats fit_column_stats(const TabularDataset& ds, std::span<const std::size_t> rows,
                             std::string fit_source) {
    ColumnStats stats;
    stats.fit_source = std::move(fit_source);
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        const auto& spec = ds.columns()[c];
        ColumnStat st;
        st.kind = spec.kind;
        if (spec.kind == ColumnKind::Continuous) {
            std::vector<double> values;
            for (std::size_t r : rows) {
                const auto& cell = ds.at(r, c);
                if (const auto* v = std::get_if<double>(&cell)) values.push_back(*v);
            }
            if (values.empty()) {
                throw DomainError("column '" + spec.name + "' has no observed values in the fitting rows");
            }
            st.median = median_of(values);
            double sum = 0.0;
            for (double v : values) sum += v;
            st.mean = sum / static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - st.mean) * (v - st.mean);
            st.std = std::sqrt(ss / static_cast<double>(values.size()));
        } else {
            std::map<std::string, std::size_t> counts;
            for (std::size_t r : rows) {
                const auto& cell = ds.at(r, c);
                if (!is_missing(cell)) ++counts[token_of(cell)];
            }
            if (counts.empty()) {
                throw DomainError("column '" + spec.name + "' has no observed values in the fitting rows");
            }
            // std::map iterates in lexicographic order, so strict '>' keeps the smallest tied token.
            std::size_t best = 0;
            for (const auto& [tok, n] : counts) {
                if (n > best) {
                    best = n;
                    st.mode = tok;
                }
            }
        }
        stats.order.push_back(spec.name);
        stats.by_column.emplace(spec.name, std::move(st));
    }
    return stats;
}

ColumnStats fit_column_stats(const TabularDataset& ds, std::string fit_source) {
    std::vector<std::size_t> all(ds.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return fit_column_stats(ds, all, std::move(fit_source));
}

} // namespace rk
