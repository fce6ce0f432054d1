#pragma once

#include "rk/dataset.hpp"
#include "rk/scoreset.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace rk::models {

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale; // population std, 1 where the feature is constant

    bool operator==(const Standardizer&) const = default;
};

struct LogisticModel {
    std::vector<std::string> features;
    std::vector<double> weights; // on standardized features when standardizer is set
    double intercept = 0.0;
    double c = 1.0;
    double class_weight0 = 1.0;
    double class_weight1 = 1.0;
    std::optional<Standardizer> standardizer;
    bool converged = false;
    int iterations = 0;

    bool operator==(const LogisticModel&) const = default;
};

struct LogisticOptions {
    bool standardize = true; // continuous columns only, train-fold mean and population std
    double gradient_tolerance = 1e-6;
    int max_iterations = 1000;
};

// Minimises sum_i w_{y_i} logloss_i + ||w||^2 / (2c) with balanced class
// weights w_k = N / (2 N_k); the intercept is unpenalised. Newton steps with
// backtracking. Non-convergence is reported in the result, not thrown.
LogisticModel fit_logistic(const TabularDataset& train, double c, const LogisticOptions& opts = {});

struct GaussianNBModel {
    std::vector<std::string> features;
    std::vector<double> mean0, mean1;
    std::vector<double> var0, var1; // smoothed
    double prior0 = 0.5;
    double prior1 = 0.5;
    double var_smoothing = 1e-9;
    double epsilon = 0.0; // var_smoothing * largest per-feature variance

    bool operator==(const GaussianNBModel&) const = default;
};

GaussianNBModel fit_gnb(const TabularDataset& train, double var_smoothing);

using Model = std::variant<LogisticModel, GaussianNBModel>;

// GNB posteriors are normalised in log space, so extreme likelihood ratios give
// exact 0/1 without NaN.
ScoreSet predict_proba(const Model& model, const TabularDataset& ds, ScoreMeta meta = {});
double predict_row(const LogisticModel& m, std::span<const double> x);
double predict_row(const GaussianNBModel& m, std::span<const double> x);

enum class Family { Logistic, GaussianNB };

const char* to_string(Family f) noexcept;
const char* param_name(Family f) noexcept;

struct GridSearchResult {
    Family family = Family::Logistic;
    std::vector<double> candidates;
    std::vector<std::vector<double>> fold_scores; // [candidate][fold]
    std::vector<double> mean_scores;
    std::size_t best_index = 0;
    std::map<std::string, double> best_params;
    double best_cv_score = 0.0;
    std::size_t folds = 5;
};

// Stratified k-fold assignment of rows; fold ids in [0, k).
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

// Each candidate is scored by mean held-out AUROC over the same stratified
// folds; ties keep the first candidate in grid order.
GridSearchResult grid_search_cv(const TabularDataset& train, Family family, const std::vector<double>& grid,
                                std::uint64_t seed, std::size_t folds = 5, const LogisticOptions& opts = {});

Model fit(Family family, const TabularDataset& train, double param, const LogisticOptions& opts = {});

// Versioned "key = value" text; doubles with 17 significant digits.
std::string model_to_text(const Model& m);
Model model_from_text(std::string_view content);

std::string grid_to_csv(const GridSearchResult& r);

} // namespace rk::models
