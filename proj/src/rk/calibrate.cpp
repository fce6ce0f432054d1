#include "rk/calibrate.hpp"

#include "rk/error.hpp"
#include "rk/metrics.hpp"
#include "rk/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rk::calibrate {

double PlattCalibrator::operator()(double f) const {
    const double z = a * f + b;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double IsotonicCalibrator::operator()(double x) const {
    const double c = std::clamp(x, lo(), hi());
    const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), c);
    return values[static_cast<std::size_t>(it - thresholds.begin()) - 1];
}

namespace {

void require_both_classes(const ScoreSet& s, const char* what) {
    s.validate();
    const auto pos = s.positives();
    if (pos == 0 || pos == s.size()) throw FitError(std::string(what) + " needs both classes in the calibration data");
}

} // namespace

PlattCalibrator fit_platt(const ScoreSet& val) {
    require_both_classes(val, "Platt scaling");
    const double n_pos = static_cast<double>(val.positives());
    const double n_neg = static_cast<double>(val.size()) - n_pos;
    const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
    const double lo_target = 1.0 / (n_neg + 2.0);
    const std::size_t n = val.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = val.labels[i] == 1 ? hi_target : lo_target;
    const auto& f = val.probs;

    // Negative log-likelihood of targets under p_i = 1 / (1 + exp(a f_i + b)).
    const auto objective = [&](double a, double b) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * f[i] + b;
            v += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return v;
    };

    constexpr int kMaxIter = 100;
    constexpr double kMinStep = 1e-10;
    constexpr double kSigma = 1e-12;
    constexpr double kTol = 1e-10;

    PlattCalibrator cal;
    cal.a = 0.0;
    cal.b = std::log((n_neg + 1.0) / (n_pos + 1.0));
    double fval = objective(cal.a, cal.b);
    int it = 0;
    for (; it < kMaxIter; ++it) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = cal.a * f[i] + cal.b;
            double p, q; // p = P(y = 1), q = 1 - p
            if (z >= 0.0) {
                const double e = std::exp(-z);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(z);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            const double d2 = p * q;
            h11 += f[i] * f[i] * d2;
            h22 += d2;
            h21 += f[i] * d2;
            const double d1 = t[i] - p;
            g1 += f[i] * d1;
            g2 += d1;
        }
        if (std::hypot(g1, g2) <= kTol) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        bool moved = false;
        while (step >= kMinStep) {
            const double na = cal.a + step * da;
            const double nb = cal.b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                cal.a = na;
                cal.b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    cal.iterations = it;
    return cal;
}

std::vector<double> pava(const std::vector<double>& y, const std::vector<double>& w) {
    if (y.size() != w.size()) throw ArgumentError("PAVA values and weights differ in length");
    struct Block {
        double sum_wy;
        double sum_w;
        std::size_t count;
        double mean() const { return sum_wy / sum_w; }
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({w[i] * y[i], w[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            const Block last = blocks.back();
            blocks.pop_back();
            blocks.back().sum_wy += last.sum_wy;
            blocks.back().sum_w += last.sum_w;
            blocks.back().count += last.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean());
    return out;
}

IsotonicCalibrator fit_isotonic(const ScoreSet& val) {
    require_both_classes(val, "isotonic regression");
    std::vector<std::size_t> idx(val.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val.probs[a] < val.probs[b]; });

    IsotonicCalibrator cal;
    std::vector<double> means, weights;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        double pos = 0.0;
        while (j < idx.size() && val.probs[idx[j]] == val.probs[idx[i]]) {
            pos += val.labels[idx[j]];
            ++j;
        }
        const double count = static_cast<double>(j - i);
        cal.thresholds.push_back(val.probs[idx[i]]);
        means.push_back(pos / count);
        weights.push_back(count);
        i = j;
    }
    cal.values = pava(means, weights);
    return cal;
}

const char* variant_name(const Calibrator& cal) noexcept {
    return std::holds_alternative<PlattCalibrator>(cal) ? kPlatt : kIsotonic;
}

ScoreSet apply(const Calibrator& cal, const ScoreSet& s) {
    ScoreSet out = s;
    std::visit(
        [&](const auto& c) {
            for (auto& p : out.probs) p = c(p);
        },
        cal);
    out.meta.variant = variant_name(cal);
    return out;
}

VariantSelection select_best_variant(const std::map<std::string, ScoreSet>& test_scores, std::size_t n_bins) {
    if (test_scores.empty()) throw ArgumentError("no calibration variants to choose from");
    std::vector<std::string> order;
    for (const char* v : {kBase, kPlatt, kIsotonic}) {
        if (test_scores.count(v)) order.emplace_back(v);
    }
    for (const auto& [name, _] : test_scores) {
        if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    }

    VariantSelection sel;
    for (const auto& name : order) sel.test_ece[name] = metrics::ece(test_scores.at(name), n_bins);
    sel.chosen = order.front();
    for (const auto& name : order) {
        // Differences below 1e-12 are ties and keep the earlier variant.
        if (sel.test_ece[name] < sel.test_ece[sel.chosen] - 1e-12) sel.chosen = name;
    }
    sel.rationale = sel.chosen + " has the lowest test ECE (";
    bool first = true;
    for (const auto& name : order) {
        sel.rationale += (first ? "" : ", ") + name + " " + text::format_fixed(sel.test_ece[name], 3);
        first = false;
    }
    sel.rationale += ")";
    return sel;
}

double calibration_drift(const ScoreSet& internal, const ScoreSet& external, std::size_t n_bins) {
    return metrics::ece(external, n_bins) - metrics::ece(internal, n_bins);
}

namespace {
constexpr std::string_view kCalHeader = "readiness-kit calibrator v1";
}

std::string calibrator_to_text(const Calibrator& cal) {
    std::string out(kCalHeader);
    out += '\n';
    if (const auto* p = std::get_if<PlattCalibrator>(&cal)) {
        out += "type = platt\n";
        out += "a = " + text::format_double17(p->a) + "\n";
        out += "b = " + text::format_double17(p->b) + "\n";
        out += "iterations = " + std::to_string(p->iterations) + "\n";
    } else {
        const auto& iso = std::get<IsotonicCalibrator>(cal);
        out += "type = isotonic\n";
        for (std::size_t i = 0; i < iso.thresholds.size(); ++i) {
            out += "knot = " + text::format_double17(iso.thresholds[i]) + "\t" + text::format_double17(iso.values[i]) +
                   "\n";
        }
    }
    return out;
}

Calibrator calibrator_from_text(std::string_view content) {
    std::string type;
    PlattCalibrator platt;
    IsotonicCalibrator iso;
    bool first = true;
    bool has_a = false, has_b = false;
    for (auto& line : text::split(content, '\n')) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            if (line != kCalHeader) throw ParseError("not a readiness-kit calibrator file");
            first = false;
            continue;
        }
        if (line.empty()) continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ParseError("malformed calibrator line '" + line + "'");
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 3);
        const auto number = [&](const std::string& v) {
            const auto d = text::parse_double(v);
            if (!d) throw ParseError("calibrator field '" + key + "' is not a number");
            return *d;
        };
        if (key == "type") {
            type = value;
        } else if (key == "a") {
            platt.a = number(value);
            has_a = true;
        } else if (key == "b") {
            platt.b = number(value);
            has_b = true;
        } else if (key == "iterations") {
            platt.iterations = static_cast<int>(number(value));
        } else if (key == "knot") {
            const auto parts = text::split(value, '\t');
            if (parts.size() != 2) throw ParseError("malformed isotonic knot");
            iso.thresholds.push_back(number(parts[0]));
            iso.values.push_back(number(parts[1]));
        } else {
            throw ParseError("unknown calibrator key '" + key + "'");
        }
    }
    if (type == "platt") {
        if (!has_a || !has_b) throw ParseError("Platt calibrator lacks a or b");
        return platt;
    }
    if (type == "isotonic") {
        if (iso.thresholds.empty()) throw ParseError("isotonic calibrator has no knots");
        for (std::size_t i = 1; i < iso.thresholds.size(); ++i) {
            if (!(iso.thresholds[i] > iso.thresholds[i - 1]) || iso.values[i] < iso.values[i - 1]) {
                throw ParseError("isotonic knots must be strictly increasing with non-decreasing values");
            }
        }
        return iso;
    }
    throw ParseError("unknown calibrator type '" + type + "'");
}

} // namespace rk::calibrate
