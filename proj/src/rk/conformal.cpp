#include "rk/conformal.hpp"

#include "rk/error.hpp"
#include "rk/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rk::conformal {

double lac_score(double prob, int cls) noexcept {
    // 1 - (1 - prob) written as prob so both call sites agree bit for bit.
    return cls == 1 ? 1.0 - prob : prob;
}

ConformalModel fit_conformal(const ScoreSet& cal, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    cal.validate();
    if (cal.size() == 0) throw ArgumentError("conformal calibration needs at least one row");
    std::vector<double> scores;
    scores.reserve(cal.size());
    for (std::size_t i = 0; i < cal.size(); ++i) scores.push_back(lac_score(cal.probs[i], cal.labels[i]));
    std::sort(scores.begin(), scores.end());

    ConformalModel m;
    m.alpha = alpha;
    m.n_cal = cal.size();
    const double n = static_cast<double>(m.n_cal);
    // The small offset keeps products such as 10 * 0.9 from rounding up a rank.
    m.rank = static_cast<std::size_t>(std::ceil((n + 1.0) * (1.0 - alpha) - 1e-9));
    if (m.rank > m.n_cal) {
        m.degenerate = true;
        m.q_hat = 1.0;
    } else {
        m.q_hat = scores[std::max<std::size_t>(m.rank, 1) - 1];
    }
    return m;
}

PredictionSet predict_set(const ConformalModel& m, double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("probability outside [0,1]");
    const double limit = m.q_hat + kSetTolerance;
    return {lac_score(prob, 1) <= limit, lac_score(prob, 0) <= limit};
}

CoverageReport coverage_report(const ConformalModel& m, const ScoreSet& test) {
    test.validate();
    if (test.size() == 0) throw UndefinedMetric("coverage of an empty test set");
    CoverageReport r;
    r.n = test.size();
    std::size_t covered = 0, total = 0, singletons = 0, empty = 0, ambiguous = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto set = predict_set(m, test.probs[i]);
        covered += set.covers(test.labels[i]);
        total += static_cast<std::size_t>(set.size());
        singletons += set.size() == 1;
        empty += set.size() == 0;
        ambiguous += set.size() == 2;
    }
    const double n = static_cast<double>(test.size());
    r.coverage = static_cast<double>(covered) / n;
    r.avg_set_size = static_cast<double>(total) / n;
    r.singleton_rate = static_cast<double>(singletons) / n;
    r.empty_rate = static_cast<double>(empty) / n;
    r.ambiguous_rate = static_cast<double>(ambiguous) / n;
    return r;
}

double coverage_drift(const CoverageReport& internal, const CoverageReport& external) {
    return internal.coverage - external.coverage;
}

std::string sets_to_csv(const ConformalModel& m, const ScoreSet& s) {
    std::string out = "row_id,prob,label,in_set_pos,in_set_neg,covered\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto set = predict_set(m, s.probs[i]);
        out += text::csv_row({std::to_string(i), text::format_double17(s.probs[i]), std::to_string(s.labels[i]),
                              set.contains_pos ? "1" : "0", set.contains_neg ? "1" : "0",
                              set.covers(s.labels[i]) ? "1" : "0"});
    }
    return out;
}

namespace {
constexpr std::string_view kHeader = "readiness-kit conformal v1";
}

std::string model_to_text(const ConformalModel& m) {
    std::string out(kHeader);
    out += "\nscore = lac\n";
    out += "alpha = " + text::format_double17(m.alpha) + "\n";
    out += "q_hat = " + text::format_double17(m.q_hat) + "\n";
    out += "n_cal = " + std::to_string(m.n_cal) + "\n";
    out += "rank = " + std::to_string(m.rank) + "\n";
    out += std::string("degenerate = ") + (m.degenerate ? "1" : "0") + "\n";
    return out;
}

ConformalModel model_from_text(std::string_view content) {
    std::map<std::string, std::string> kv;
    bool first = true;
    for (auto& line : text::split(content, '\n')) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            if (line != kHeader) throw ParseError("not a readiness-kit conformal file");
            first = false;
            continue;
        }
        if (line.empty()) continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ParseError("malformed conformal line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    const auto num = [&](const char* k) {
        const auto it = kv.find(k);
        if (it == kv.end()) throw ParseError(std::string("conformal file lacks '") + k + "'");
        const auto d = text::parse_double(it->second);
        if (!d) throw ParseError(std::string("conformal field '") + k + "' is not a number");
        return *d;
    };
    ConformalModel m;
    m.alpha = num("alpha");
    m.q_hat = num("q_hat");
    m.n_cal = static_cast<std::size_t>(num("n_cal"));
    m.rank = static_cast<std::size_t>(num("rank"));
    m.degenerate = num("degenerate") != 0.0;
    if (!(m.q_hat >= 0.0 && m.q_hat <= 1.0) || !(m.alpha > 0.0 && m.alpha < 1.0) || m.n_cal < 1) {
        throw ParseError("conformal model fields out of range");
    }
    return m;
}

} // namespace rk::conformal
