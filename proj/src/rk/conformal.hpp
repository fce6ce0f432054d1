#pragma once

#include "rk/scoreset.hpp"

#include <string>

namespace rk::conformal {

struct ConformalModel {
    double q_hat = 1.0;
    double alpha = 0.1;
    std::size_t n_cal = 0;
    std::size_t rank = 0;    // ceil((n + 1)(1 - alpha)), 1-based
    bool degenerate = false; // rank > n_cal, q_hat forced to 1

    bool operator==(const ConformalModel&) const = default;
};

struct PredictionSet {
    bool contains_pos = false;
    bool contains_neg = false;

    int size() const noexcept { return int(contains_pos) + int(contains_neg); }
    bool covers(int label) const noexcept { return label == 1 ? contains_pos : contains_neg; }
    bool operator==(const PredictionSet&) const = default;
};

// LAC conformity score of class `cls` for a row with positive probability `prob`:
// 1 - p(cls). Used identically for calibration and prediction.
double lac_score(double prob, int cls) noexcept;

// q_hat is the ceil((n + 1)(1 - alpha))-th smallest true-class score.
ConformalModel fit_conformal(const ScoreSet& cal, double alpha);

// Absolute slack on the set rule, so scores equal to q_hat up to rounding are
// kept (same constant as the MAPIE LAC implementation).
inline constexpr double kSetTolerance = 1e-8;

// Class c is in the set iff lac_score(prob, c) <= q_hat + kSetTolerance. Sets may be empty.
PredictionSet predict_set(const ConformalModel& m, double prob);

struct CoverageReport {
    double coverage = 0.0;
    double avg_set_size = 0.0;
    double singleton_rate = 0.0;
    double empty_rate = 0.0;
    double ambiguous_rate = 0.0;
    std::size_t n = 0;
};

CoverageReport coverage_report(const ConformalModel& m, const ScoreSet& test);

// internal.coverage - external.coverage
double coverage_drift(const CoverageReport& internal, const CoverageReport& external);

// row_id,prob,label,in_set_pos,in_set_neg,covered
std::string sets_to_csv(const ConformalModel& m, const ScoreSet& s);

std::string model_to_text(const ConformalModel& m);
ConformalModel model_from_text(std::string_view content);

} // namespace rk::conformal
