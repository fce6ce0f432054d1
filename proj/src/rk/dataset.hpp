#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rk {

enum class ColumnKind { Continuous, Categorical };

const char* to_string(ColumnKind kind) noexcept;

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    // Declared nominal values (ARFF header), trimmed. May be empty.
    std::vector<std::string> categories;
    // token -> {0,1}; populated by encode_binary.
    std::map<std::string, int> category_map;

    bool encoded() const noexcept { return !category_map.empty(); }
    bool operator==(const ColumnSpec&) const = default;
};

struct Missing {
    bool operator==(const Missing&) const = default;
};

using Cell = std::variant<Missing, double, std::string>;

inline bool is_missing(const Cell& c) noexcept { return std::holds_alternative<Missing>(c); }

// Rows x typed columns with an optional binary label vector. Immutable after
// construction; the constructor enforces the shape invariants.
class TabularDataset {
public:
    TabularDataset() = default;
    TabularDataset(std::vector<ColumnSpec> columns, std::vector<std::vector<Cell>> rows,
                   std::optional<std::vector<int>> labels, std::string provenance,
                   std::optional<std::vector<std::string>> label_tokens = std::nullopt);

    const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
    const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
    // Raw class tokens before label encoding.
    const std::optional<std::vector<std::string>>& label_tokens() const noexcept { return label_tokens_; }
    const std::string& provenance() const noexcept { return provenance_; }

    std::size_t n_rows() const noexcept { return rows_.size(); }
    std::size_t n_cols() const noexcept { return columns_.size(); }
    std::optional<std::size_t> column_index(const std::string& name) const;
    const Cell& at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
    std::vector<std::string> column_names() const;

    std::size_t count_missing() const noexcept;
    TabularDataset subset(std::span<const std::size_t> indices) const;

    // Row-major numeric feature matrix; every cell must be a number.
    std::vector<double> numeric_matrix() const;

    bool operator==(const TabularDataset&) const = default;

private:
    std::vector<ColumnSpec> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::optional<std::vector<int>> labels_;
    std::optional<std::vector<std::string>> label_tokens_;
    std::string provenance_;
};

struct ColumnStat {
    ColumnKind kind = ColumnKind::Continuous;
    double median = 0.0;
    double mean = 0.0;
    double std = 0.0; // population standard deviation
    std::string mode;

    bool operator==(const ColumnStat&) const = default;
};

// Per-column imputation statistics. Fit only from training-fold rows.
struct ColumnStats {
    std::vector<std::string> order;
    std::map<std::string, ColumnStat> by_column;
    std::string fit_source;

    const ColumnStat* find(const std::string& name) const;
    bool operator==(const ColumnStats&) const = default;
};

// Median of even-length samples is the mean of the two central values. Mode
// ties resolve to the lexicographically smallest token.
ColumnStats fit_column_stats(const TabularDataset& ds, std::span<const std::size_t> rows,
                             std::string fit_source);
ColumnStats fit_column_stats(const TabularDataset& ds, std::string fit_source);

double median_of(std::vector<double> values);

} // namespace rk
