#pragma once

#include "rk/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rk::ingest {

struct ArffOptions {
    // Attribute whose values become the label tokens (case-insensitive match).
    std::string target = "class";
};

// Accepts '%' comments, case-insensitive keywords and quoted names/values.
// Nominal attributes whose declared values are all numeric are read as
// continuous (ordinal lab grades). A row may carry trailing empty fields past
// the declared arity; any other arity mismatch is a parse error.
TabularDataset parse_arff(const std::filesystem::path& path, const ArffOptions& opts = {});
TabularDataset parse_arff_text(std::string_view content, const ArffOptions& opts = {},
                               const std::string& source = "arff");

// Header must contain every schema column; `label_column`, when non-empty, is
// read as 0/1 labels. Any other header column is a schema error. Encoded
// categorical columns read 0/1 tokens as numbers. Columns are
// returned in schema order; empty strings become missing.
TabularDataset parse_csv(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema,
                         const std::string& label_column = "");
TabularDataset parse_csv_text(std::string_view content, const std::vector<ColumnSpec>& schema,
                              const std::string& label_column = "", const std::string& source = "csv");

// Writes cells and, when present, labels as the last column named `label_column`.
std::string to_csv(const TabularDataset& ds, const std::string& label_column = "label");
void write_csv(const TabularDataset& ds, const std::filesystem::path& path,
               const std::string& label_column = "label");

// Whitespace-strips category tokens, then fills continuous gaps with the
// median and categorical gaps with the mode from `stats`.
TabularDataset clean_and_impute(const TabularDataset& ds, const ColumnStats& stats);

// Maps class tokens to {0,1}: `positive` -> 1, the single other token -> 0.
std::vector<int> encode_labels(std::span<const std::string> tokens, const std::string& positive = "ckd");

// Replaces categorical tokens by 0/1 using each column's category_map (built
// from declared and observed tokens when absent) and encodes label tokens.
TabularDataset encode_binary(const TabularDataset& ds, const std::string& positive_label = "ckd");

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
    std::uint64_t seed = 42;

    bool operator==(const SplitIndices&) const = default;
};

// Two-stage stratified split with absolute fold sizes: stage one draws the test
// fold from all rows, stage two draws the validation fold from the remainder.
// Per-class counts use largest-remainder rounding.
SplitIndices stratified_split(std::span<const int> labels, std::size_t test_count,
                              std::size_t valid_count, std::uint64_t seed);
// Fractions are of the full row count, rounded to the nearest integer.
SplitIndices stratified_split_fractions(std::span<const int> labels, double test_frac, double valid_frac,
                                        std::uint64_t seed);

std::string split_to_json(const SplitIndices& split);
SplitIndices split_from_json(std::string_view json);

std::string stats_to_text(const ColumnStats& stats);
ColumnStats stats_from_text(std::string_view content);

std::string schema_to_text(const std::vector<ColumnSpec>& schema);
std::vector<ColumnSpec> schema_from_text(std::string_view content);

struct Harmonized {
    TabularDataset dataset;
    std::vector<std::string> synthesized; // target columns absent from the external data
    std::vector<std::string> dropped;     // external columns not in the target schema
};

// Projects an external dataset onto the training schema. Absent columns become
// constants (training median or mode); shared columns are cleaned and imputed
// with the training statistics.
Harmonized harmonize(const TabularDataset& external, const std::vector<ColumnSpec>& target_schema,
                     const ColumnStats& stats);

} // namespace rk::ingest
