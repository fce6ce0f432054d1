#include "rk/metrics.hpp"

#include "rk/error.hpp"
#include "rk/rng.hpp"
#include "rk/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rk::metrics {

namespace {

std::vector<std::size_t> order_by_prob(const ScoreSet& s, bool descending) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return descending ? s.probs[a] > s.probs[b] : s.probs[a] < s.probs[b];
    });
    return idx;
}

} // namespace

double auroc(const ScoreSet& s) {
    const std::size_t n_pos = s.positives();
    const std::size_t n_neg = s.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("AUROC needs both classes");
    const auto idx = order_by_prob(s, false);
    // Sum of midranks of the positives (Mann-Whitney U).
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < idx.size() && s.probs[idx[j]] == s.probs[idx[i]]) {
            pos_in_group += s.labels[idx[j]] == 1;
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        rank_sum += midrank * static_cast<double>(pos_in_group);
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

double auprc(const ScoreSet& s) {
    const std::size_t n_pos = s.positives();
    if (n_pos == 0) throw UndefinedMetric("AUPRC needs at least one positive");
    const auto idx = order_by_prob(s, true);
    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && s.probs[idx[j]] == s.probs[idx[i]]) {
            tp += s.labels[idx[j]] == 1;
            ++j;
        }
        seen = j;
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

ConfusionMetrics confusion_metrics(const ScoreSet& s, double threshold) {
    ConfusionMetrics m;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool pred = s.probs[i] >= threshold;
        const bool pos = s.labels[i] == 1;
        if (pred && pos) ++m.tp;
        else if (pred) ++m.fp;
        else if (pos) ++m.fn;
        else ++m.tn;
    }
    const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(m.tp + m.tn, s.size());
    m.sensitivity = ratio(m.tp, m.tp + m.fn);
    m.specificity = ratio(m.tn, m.tn + m.fp);
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
    return m;
}

std::size_t ReliabilityBins::total() const noexcept {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.count;
    return n;
}

std::size_t bin_index(double p, std::size_t n_bins) {
    const double n = static_cast<double>(n_bins);
    auto idx = static_cast<std::size_t>(std::clamp(std::floor(p * n), 0.0, n - 1.0));
    // Correct for rounding in p * n so that membership follows the edge values b / n.
    while (idx > 0 && p < static_cast<double>(idx) / n) --idx;
    while (idx + 1 < n_bins && p >= static_cast<double>(idx + 1) / n) ++idx;
    return idx;
}

ReliabilityBins reliability_bins(const ScoreSet& s, std::size_t n_bins) {
    if (n_bins < 1) throw ArgumentError("number of bins must be at least 1");
    ReliabilityBins out;
    out.n_bins = n_bins;
    out.bins.resize(n_bins);
    std::vector<double> sum_p(n_bins, 0.0);
    std::vector<std::size_t> pos(n_bins, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto b = bin_index(s.probs[i], n_bins);
        ++out.bins[b].count;
        sum_p[b] += s.probs[i];
        pos[b] += s.labels[i] == 1;
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        auto& bin = out.bins[b];
        bin.lo = static_cast<double>(b) / static_cast<double>(n_bins);
        bin.hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
        if (bin.count > 0) {
            bin.mean_confidence = sum_p[b] / static_cast<double>(bin.count);
            bin.empirical_frequency = static_cast<double>(pos[b]) / static_cast<double>(bin.count);
        }
    }
    return out;
}

double ece(const ReliabilityBins& bins, std::size_t n_total) {
    if (n_total == 0) throw UndefinedMetric("ECE of an empty score set");
    double e = 0.0;
    for (const auto& b : bins.bins) {
        if (b.count == 0) continue;
        e += static_cast<double>(b.count) / static_cast<double>(n_total) *
             std::abs(b.empirical_frequency - b.mean_confidence);
    }
    return e;
}

double mce(const ReliabilityBins& bins) {
    if (bins.total() == 0) throw UndefinedMetric("MCE of an empty score set");
    double m = 0.0;
    for (const auto& b : bins.bins) {
        if (b.count == 0) continue;
        m = std::max(m, std::abs(b.empirical_frequency - b.mean_confidence));
    }
    return m;
}

double ece(const ScoreSet& s, std::size_t n_bins) { return ece(reliability_bins(s, n_bins), s.size()); }

double brier(const ScoreSet& s) {
    if (s.size() == 0) throw UndefinedMetric("Brier score of an empty score set");
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = s.probs[i] - static_cast<double>(s.labels[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(s.size());
}

double brier_skill(const ScoreSet& s) {
    const double pi = s.prevalence();
    if (pi == 0.0 || pi == 1.0) throw UndefinedMetric("Brier skill needs both classes");
    return 1.0 - brier(s) / (pi * (1.0 - pi));
}

const char* to_string(MetricKind k) noexcept { return k == MetricKind::Auroc ? "auroc" : "ece"; }

MetricKind metric_from_string(const std::string& name) {
    if (name == "auroc") return MetricKind::Auroc;
    if (name == "ece") return MetricKind::Ece;
    throw ArgumentError("unknown bootstrap metric '" + name + "' (expected auroc or ece)");
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw UndefinedMetric("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapCI bootstrap_ci(const ScoreSet& s, MetricKind metric, std::size_t n_resamples, double level,
                         std::uint64_t seed, std::size_t ece_bins) {
    if (n_resamples < 1) throw ArgumentError("bootstrap needs at least one resample");
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");
    if (s.size() == 0) throw UndefinedMetric("bootstrap of an empty score set");

    const auto evaluate = [&](const ScoreSet& x) {
        return metric == MetricKind::Auroc ? auroc(x) : ece(x, ece_bins);
    };

    BootstrapCI ci;
    ci.point = evaluate(s);
    ci.n_resamples = n_resamples;
    ci.level = level;
    ci.seed = seed;

    const std::size_t n = s.size();
    std::vector<double> values;
    values.reserve(n_resamples);
    ScoreSet draw;
    draw.probs.resize(n);
    draw.labels.resize(n);
    for (std::size_t r = 0; r < n_resamples; ++r) {
        Rng rng(stream_seed(seed, r));
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto row = static_cast<std::size_t>(rng.below(n));
                draw.probs[i] = s.probs[row];
                draw.labels[i] = s.labels[row];
            }
            try {
                values.push_back(evaluate(draw));
                break;
            } catch (const UndefinedMetric&) {
                ++ci.redraws;
                if (ci.redraws > n_resamples) {
                    throw UndefinedMetric(std::string("bootstrap ") + to_string(metric) +
                                          " is undefined on more than half of the resamples");
                }
            }
        }
    }
    std::sort(values.begin(), values.end());
    ci.lo = quantile_sorted(values, (1.0 - level) / 2.0);
    ci.hi = quantile_sorted(values, (1.0 + level) / 2.0);
    return ci;
}

MetricReport report(const ScoreSet& s, double threshold, std::size_t ece_bins) {
    MetricReport r;
    r.threshold = threshold;
    r.n = s.size();
    const auto guarded = [](auto&& f) -> std::optional<double> {
        try {
            return f();
        } catch (const UndefinedMetric&) {
            return std::nullopt;
        }
    };
    r.prevalence = s.size() ? s.prevalence() : 0.0;
    r.auroc = guarded([&] { return auroc(s); });
    r.auprc = guarded([&] { return auprc(s); });
    const auto cm = confusion_metrics(s, threshold);
    r.f1 = cm.f1;
    r.accuracy = cm.accuracy;
    r.sensitivity = cm.sensitivity;
    r.specificity = cm.specificity;
    r.ece = guarded([&] { return ece(s, ece_bins); });
    r.mce = guarded([&] { return mce(reliability_bins(s, ece_bins)); });
    r.brier = guarded([&] { return brier(s); });
    r.brier_skill = guarded([&] { return brier_skill(s); });
    return r;
}

std::string bins_to_csv(const ReliabilityBins& bins) {
    std::string out = "bin_lo,bin_hi,count,confidence,frequency\n";
    for (const auto& b : bins.bins) {
        out += text::csv_row({text::format_double(b.lo), text::format_double(b.hi), std::to_string(b.count),
                              text::format_double(b.mean_confidence), text::format_double(b.empirical_frequency)});
    }
    return out;
}

} // namespace rk::metrics
