#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rk {

struct ScoreMeta {
    std::string model;
    std::string variant;
    std::string cohort;

    bool operator==(const ScoreMeta&) const = default;
};

// Predicted positive-class probabilities with true labels for one
// (model, variant, cohort). Every metric consumes this.
struct ScoreSet {
    std::vector<double> probs;
    std::vector<int> labels;
    // Per-row subgroup tags keyed by tag name (age_group, dm, htn, ...).
    std::map<std::string, std::vector<std::string>> tags;
    ScoreMeta meta;

    std::size_t size() const noexcept { return probs.size(); }
    std::size_t positives() const noexcept;
    double prevalence() const;

    // Throws ArgumentError on length mismatch, probabilities outside [0,1] or
    // labels outside {0,1}.
    void validate() const;

    ScoreSet subset(std::span<const std::size_t> rows) const;

    bool operator==(const ScoreSet&) const = default;
};

ScoreSet make_scoreset(std::vector<double> probs, std::vector<int> labels, ScoreMeta meta = {});

// CSV: prob,label[,<tag>...]. An optional first line "# model=..,variant=..,cohort=.."
// carries the metadata. Probabilities are written with 17 significant digits.
std::string scores_to_csv(const ScoreSet& s);
ScoreSet scores_from_csv(std::string_view content);
void export_scores(const ScoreSet& s, const std::filesystem::path& path);
ScoreSet import_scores(const std::filesystem::path& path);

} // namespace rk
