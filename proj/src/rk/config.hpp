#pragma once

#include "rk/readiness.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rk::pipeline {

struct ModelEntry {
    std::string id;     // LR, NB, RF, ...
    std::string source; // native-lr | native-gnb | scores:<dir>

    bool native() const { return source == "native-lr" || source == "native-gnb"; }
    // Directory part of a scores:<dir> source.
    std::string score_dir() const;
    bool operator==(const ModelEntry&) const = default;
};

// Flat "key = value" file. '#' starts a comment line. Relative paths resolve
// against the directory holding the config file.
struct PipelineConfig {
    std::filesystem::path base_dir;

    std::string arff_path;
    std::string cohort_path;
    std::string out_dir = "out";

    std::uint64_t seed = 42;
    double alpha = 0.10;
    std::size_t ece_bins = 10;
    std::size_t subgroup_bins = 5;
    std::size_t min_group_size = 10;
    std::size_t test_size = 61;
    std::size_t valid_size = 60;
    std::size_t cv_folds = 5;
    std::size_t bootstrap_resamples = 1000;
    double bootstrap_level = 0.95;
    double decision_threshold = 0.5;

    std::string impute_stats = "train"; // train | full
    bool standardize = true;
    std::string target = "class";
    std::string positive_token = "ckd";

    double egfr_threshold = 60.0;
    std::string cohort_creatinine = "sc";
    std::string cohort_age = "age";
    std::string cohort_sex = "sex";
    double age_cutoff = 65.0;

    bool transparency = true;
    std::vector<std::string> subgroups = {"age_group", "dm=yes", "htn=yes"};
    std::vector<ModelEntry> models = {{"LR", "native-lr"}, {"NB", "native-gnb"}};
    std::vector<double> lr_grid = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> gnb_grid = {1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
    std::map<std::string, double> thresholds; // C1..C7 overrides

    std::filesystem::path resolve(const std::string& p) const;
    std::filesystem::path out_path() const { return resolve(out_dir); }
    std::vector<readiness::CriterionSpec> criteria() const;
    std::vector<readiness::GroupSelector> selectors() const;
    void validate() const;

    bool operator==(const PipelineConfig&) const = default;
};

PipelineConfig parse_config(std::string_view content, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
// Canonical form: every key, fixed order, shortest round-trip numbers.
std::string config_to_text(const PipelineConfig& cfg);

} // namespace rk::pipeline
