#pragma once

#include "rk/scoreset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rk::metrics {

// Probability that a random positive outranks a random negative; ties count 1/2.
// Throws UndefinedMetric unless both classes are present.
double auroc(const ScoreSet& s);

// Average precision with equal scores grouped into one threshold step.
double auprc(const ScoreSet& s);

// Each rate is empty when its denominator is zero.
struct ConfusionMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> f1;
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> precision;
};

// Positive iff prob >= threshold.
ConfusionMetrics confusion_metrics(const ScoreSet& s, double threshold = 0.5);

struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_confidence = 0.0;     // mean predicted positive probability
    double empirical_frequency = 0.0; // fraction of positives
};

struct ReliabilityBins {
    std::size_t n_bins = 0;
    std::vector<Bin> bins;

    std::size_t total() const noexcept;
};

// Bin b covers [b/n, (b+1)/n); the last bin is closed at 1.
std::size_t bin_index(double p, std::size_t n_bins);
ReliabilityBins reliability_bins(const ScoreSet& s, std::size_t n_bins);

double ece(const ReliabilityBins& bins, std::size_t n_total);
double mce(const ReliabilityBins& bins);
double ece(const ScoreSet& s, std::size_t n_bins = 10);

double brier(const ScoreSet& s);
// 1 - brier / (pi (1 - pi)) with pi the prevalence of s.
double brier_skill(const ScoreSet& s);

enum class MetricKind { Auroc, Ece };

const char* to_string(MetricKind k) noexcept;
MetricKind metric_from_string(const std::string& name);

struct BootstrapCI {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n_resamples = 0;
    std::size_t redraws = 0; // resamples discarded because the metric was undefined
    double level = 0.95;
    std::uint64_t seed = 42;
};

// Percentile interval at the (1 -/+ level)/2 quantiles, linear interpolation
// between order statistics. Resample r draws from stream_seed(seed, r); a draw
// on which the metric is undefined is replaced by the next draw of the same
// stream. Fails when more than half of all draws are undefined.
BootstrapCI bootstrap_ci(const ScoreSet& s, MetricKind metric, std::size_t n_resamples, double level,
                         std::uint64_t seed, std::size_t ece_bins = 10);

// Linear-interpolation quantile of a sorted sample, q in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double q);

struct MetricReport {
    std::optional<double> auroc, auprc, f1, accuracy, sensitivity, specificity, ece, mce, brier, brier_skill;
    double threshold = 0.5;
    std::size_t n = 0;
    double prevalence = 0.0;
};

MetricReport report(const ScoreSet& s, double threshold = 0.5, std::size_t ece_bins = 10);

// bin_lo,bin_hi,count,confidence,frequency
std::string bins_to_csv(const ReliabilityBins& bins);

} // namespace rk::metrics
