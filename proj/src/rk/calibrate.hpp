#pragma once

#include "rk/scoreset.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace rk::calibrate {

// calibrated = 1 / (1 + exp(a * f + b)), f the base positive probability.
// Monotone increasing in f iff a < 0.
struct PlattCalibrator {
    double a = 0.0;
    double b = 0.0;
    int iterations = 0;

    double operator()(double f) const;
    bool operator==(const PlattCalibrator&) const = default;
};

// Right-continuous step function over strictly increasing knots.
struct IsotonicCalibrator {
    std::vector<double> thresholds;
    std::vector<double> values;

    double lo() const { return thresholds.front(); }
    double hi() const { return thresholds.back(); }
    // Clamps to [lo, hi], then returns the value of the last knot <= x.
    double operator()(double x) const;
    bool operator==(const IsotonicCalibrator&) const = default;
};

using Calibrator = std::variant<PlattCalibrator, IsotonicCalibrator>;

// Platt's method with prior-corrected targets (N+ + 1)/(N+ + 2) and 1/(N- + 2),
// Newton iterations with backtracking to gradient norm 1e-10.
PlattCalibrator fit_platt(const ScoreSet& val);

// Pool-adjacent-violators on (score, label) sorted by score; equal scores are
// pooled first.
IsotonicCalibrator fit_isotonic(const ScoreSet& val);

// Weighted PAVA on an already ordered sequence; returns one fitted value per input.
std::vector<double> pava(const std::vector<double>& y, const std::vector<double>& w);

// Transforms probabilities only; labels, tags and cohort are copied. The
// variant field of the result names the calibrator.
ScoreSet apply(const Calibrator& cal, const ScoreSet& s);
const char* variant_name(const Calibrator& cal) noexcept;

inline constexpr const char* kBase = "base";
inline constexpr const char* kPlatt = "platt";
inline constexpr const char* kIsotonic = "isotonic";

struct VariantSelection {
    std::map<std::string, double> test_ece;
    std::string chosen;
    std::string rationale;
};

// Lowest test ECE (10 bins) wins; ties resolve base > platt > isotonic.
VariantSelection select_best_variant(const std::map<std::string, ScoreSet>& test_scores, std::size_t n_bins = 10);

// ECE(external) - ECE(internal).
double calibration_drift(const ScoreSet& internal, const ScoreSet& external, std::size_t n_bins = 10);

std::string calibrator_to_text(const Calibrator& cal);
Calibrator calibrator_from_text(std::string_view content);

} // namespace rk::calibrate
