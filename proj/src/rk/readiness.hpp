#pragma once

#include "rk/scoreset.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rk::readiness {

// "age_group" selects every level of the tag; "dm=yes" selects one level.
struct GroupSelector {
    std::string key;
    std::optional<std::string> value;

    static GroupSelector parse(const std::string& text);
    std::string to_string() const;
};

struct SubgroupEce {
    std::string name; // "<key>=<value>"
    std::size_t n = 0;
    std::optional<double> ece; // empty when excluded
    bool excluded = false;
};

struct SubgroupReport {
    std::vector<SubgroupEce> groups;
    double gap = 0.0; // max - min ECE over non-excluded groups, pooled across selectors
    double max_ece = 0.0;
    double min_ece = 0.0;
    std::size_t n_bins = 5;
    std::size_t min_group_size = 10;
};

// Groups smaller than `min_n` are reported but excluded from the gap. Throws
// UndefinedMetric when no group is valid.
SubgroupReport subgroup_ece(const ScoreSet& s, const std::vector<GroupSelector>& selectors, std::size_t n_bins = 5,
                            std::size_t min_n = 10);

enum class Direction { AtLeast, AtMost };
enum class Status { Pass, Marginal, Fail };

const char* to_string(Direction d) noexcept;
const char* to_string(Status s) noexcept;
char letter(Status s) noexcept;
int points(Status s) noexcept;

struct CriterionSpec {
    std::string id;
    std::string description;
    std::string metric; // input key
    Direction direction = Direction::AtLeast;
    double threshold = 0.0;
    double marginal_factor = 0.20;
    std::string cohort = "external";
    bool absolute = false;  // evaluate |value|
    bool automatic = false; // PASS iff the input flag is set
};

// C1-C8 with the default thresholds.
std::vector<CriterionSpec> default_criteria();

struct CriterionResult {
    std::string id;
    std::optional<double> value;
    Status status = Status::Fail;
    int points = 0;
    std::string reason;
};

// at_least: PASS v >= t, MARGINAL t(1 - m) <= v < t. at_most: PASS v <= t,
// MARGINAL t < v <= t(1 + m). An undefined value is a FAIL with a reason.
CriterionResult evaluate_criterion(const CriterionSpec& spec, std::optional<double> value);

struct ChecklistReport {
    std::string model;
    std::string variant;
    std::vector<CriterionResult> criteria;
    int total = 0;
    int max_total = 16;
};

using CriterionInputs = std::map<std::string, std::optional<double>>;

// Input keys: external_auroc, external_ece, calibration_drift,
// external_coverage, coverage_drift, external_singleton_rate,
// subgroup_ece_gap, transparency (1 = set).
ChecklistReport score_checklist(const CriterionInputs& inputs, const std::vector<CriterionSpec>& specs,
                                const std::string& model = "", const std::string& variant = "");

std::string checklist_to_json(const std::vector<ChecklistReport>& reports, const std::vector<CriterionSpec>& specs);
// model,variant,C1..C8,total
std::string checklist_to_csv(const std::vector<ChecklistReport>& reports, const std::vector<CriterionSpec>& specs);
// model,criterion,status,points: long form for heatmaps
std::string heatmap_csv(const std::vector<ChecklistReport>& reports);

struct NamedInputs {
    std::string model;
    std::string variant;
    CriterionInputs inputs;
};

// {"models": [{"model": "LR", "variant": "isotonic", "external_auroc": 0.485, ..., "transparency": true}]}
std::vector<NamedInputs> inputs_from_json(std::string_view json);

} // namespace rk::readiness
