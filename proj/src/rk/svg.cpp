#include "rk/svg.hpp"

#include "rk/text.hpp"

namespace rk::svg {

namespace {

constexpr double kWidth = 480, kHeight = 480;
constexpr double kLeft = 64, kRight = 456, kTop = 40, kBottom = 416;

std::string fx(double v) { return text::format_fixed(v, 2); }

double px(double p) { return kLeft + p * (kRight - kLeft); }
double py(double p) { return kBottom - p * (kBottom - kTop); }

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string text_el(double x, double y, const std::string& s, const std::string& extra = "") {
    return "<text x=\"" + fx(x) + "\" y=\"" + fx(y) + "\"" + extra + ">" + escape(s) + "</text>\n";
}

} // namespace

std::string reliability_svg(const metrics::ReliabilityBins& bins, const Annotations& annotations,
                            const std::string& title) {
    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(kWidth) + "\" height=\"" + fx(kHeight) +
         "\" viewBox=\"0 0 480 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect x=\"0\" y=\"0\" width=\"480\" height=\"480\" fill=\"white\"/>\n";
    o += text_el(kWidth / 2, 24, title, " text-anchor=\"middle\" font-size=\"14\"");

    // Frame, grid and ticks.
    o += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int i = 1; i < 5; ++i) {
        const double t = i / 5.0;
        o += "<line x1=\"" + fx(px(t)) + "\" y1=\"" + fx(py(0)) + "\" x2=\"" + fx(px(t)) + "\" y2=\"" + fx(py(1)) +
             "\"/>\n";
        o += "<line x1=\"" + fx(px(0)) + "\" y1=\"" + fx(py(t)) + "\" x2=\"" + fx(px(1)) + "\" y2=\"" + fx(py(t)) +
             "\"/>\n";
    }
    o += "</g>\n";
    o += "<rect x=\"" + fx(kLeft) + "\" y=\"" + fx(kTop) + "\" width=\"" + fx(kRight - kLeft) + "\" height=\"" +
         fx(kBottom - kTop) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        o += text_el(px(t), kBottom + 16, text::format_fixed(t, 1), " text-anchor=\"middle\"");
        o += text_el(kLeft - 6, py(t) + 4, text::format_fixed(t, 1), " text-anchor=\"end\"");
    }
    o += text_el((kLeft + kRight) / 2, kHeight - 30, "Mean predicted probability", " text-anchor=\"middle\"");
    o += "<text x=\"18\" y=\"" + fx((kTop + kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fx((kTop + kBottom) / 2) + ")\">Fraction of positives</text>\n";

    o += "<line x1=\"" + fx(px(0)) + "\" y1=\"" + fx(py(0)) + "\" x2=\"" + fx(px(1)) + "\" y2=\"" + fx(py(1)) +
         "\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n";

    std::string points;
    std::string markers;
    for (const auto& b : bins.bins) {
        if (b.count == 0) continue;
        const auto x = fx(px(b.mean_confidence));
        const auto y = fx(py(b.empirical_frequency));
        points += (points.empty() ? "" : " ") + x + "," + y;
        markers += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"4\" fill=\"#1f77b4\"><title>n=" +
                   std::to_string(b.count) + "</title></circle>\n";
    }
    if (!points.empty()) {
        o += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
        o += markers;
    }

    if (!annotations.empty()) {
        const double h = 10 + 16.0 * static_cast<double>(annotations.size());
        o += "<rect x=\"" + fx(kLeft + 10) + "\" y=\"" + fx(kTop + 10) + "\" width=\"150\" height=\"" + fx(h) +
             "\" fill=\"white\" stroke=\"#888888\"/>\n";
        double y = kTop + 26;
        for (const auto& [k, v] : annotations) {
            o += text_el(kLeft + 18, y, k + ": " + v);
            y += 16;
        }
    }
    o += "</svg>\n";
    return o;
}

void render_reliability_svg(const metrics::ReliabilityBins& bins, const Annotations& annotations,
                            const std::string& title, const std::filesystem::path& out) {
    text::write_file(out, reliability_svg(bins, annotations, title));
}

std::string checklist_heatmap_svg(const std::vector<readiness::ChecklistReport>& reports) {
    constexpr double cell = 44, left = 90, top = 40;
    const std::size_t n_crit = reports.empty() ? 0 : reports.front().criteria.size();
    const double w = left + cell * static_cast<double>(n_crit) + 80;
    const double h = top + cell * static_cast<double>(reports.size()) + 20;
    std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(w) + "\" height=\"" + fx(h) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect x=\"0\" y=\"0\" width=\"" + fx(w) + "\" height=\"" + fx(h) + "\" fill=\"white\"/>\n";
    for (std::size_t c = 0; c < n_crit; ++c) {
        o += text_el(left + cell * (static_cast<double>(c) + 0.5), top - 10, reports.front().criteria[c].id,
                     " text-anchor=\"middle\"");
    }
    o += text_el(left + cell * static_cast<double>(n_crit) + 40, top - 10, "Total", " text-anchor=\"middle\"");
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const double y = top + cell * static_cast<double>(r);
        o += text_el(left - 8, y + cell / 2 + 4, reports[r].model, " text-anchor=\"end\"");
        for (std::size_t c = 0; c < reports[r].criteria.size(); ++c) {
            const auto st = reports[r].criteria[c].status;
            const char* fill = st == readiness::Status::Pass       ? "#4caf50"
                               : st == readiness::Status::Marginal ? "#ffc107"
                                                                   : "#e57373";
            const double x = left + cell * static_cast<double>(c);
            o += "<rect x=\"" + fx(x) + "\" y=\"" + fx(y) + "\" width=\"" + fx(cell) + "\" height=\"" + fx(cell) +
                 "\" fill=\"" + fill + "\" stroke=\"white\"/>\n";
            o += text_el(x + cell / 2, y + cell / 2 + 4, std::string(1, readiness::letter(st)),
                         " text-anchor=\"middle\"");
        }
        o += text_el(left + cell * static_cast<double>(n_crit) + 40, y + cell / 2 + 4,
                     std::to_string(reports[r].total) + "/" + std::to_string(reports[r].max_total),
                     " text-anchor=\"middle\"");
    }
    o += "</svg>\n";
    return o;
}

} // namespace rk::svg
