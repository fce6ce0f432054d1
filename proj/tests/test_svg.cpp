#include "rk/metrics.hpp"
#include "rk/readiness.hpp"
#include "rk/svg.hpp"
#include "rk/text.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace rk;

namespace {

metrics::ReliabilityBins fixture_bins() {
    const auto s = test::scores({0.05, 0.15, 0.2, 0.45, 0.5, 0.55, 0.8, 0.9, 0.95, 1.0}, {0, 0, 1, 0, 1, 1, 1, 0, 1, 1});
    return metrics::reliability_bins(s, 5);
}

const svg::Annotations kNotes{{"ECE", "0.123"}, {"AUROC", "0.456"}};

} // namespace

TEST_CASE("reliability diagram matches the golden file") {
    const auto out = svg::reliability_svg(fixture_bins(), kNotes, "LR / base / test");
    const auto golden_path = test::source_dir() / "tests/golden/reliability_fixture.svg";
    if (std::getenv("RK_UPDATE_GOLDEN")) text::write_file(golden_path, out);
    CHECK(out == text::read_file(golden_path));
}

TEST_CASE("reliability diagram content") {
    const auto out = svg::reliability_svg(fixture_bins(), kNotes, "a < b & c");
    CHECK(out.rfind("<svg", 0) == 0);
    CHECK(out.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(out.find("stroke-dasharray") != std::string::npos);
    CHECK(out.find("ECE") < out.find("AUROC"));
    CHECK(out == svg::reliability_svg(fixture_bins(), kNotes, "a < b & c"));

    test::TempDir dir("svg");
    svg::render_reliability_svg(fixture_bins(), kNotes, "t", dir / "r.svg");
    CHECK(text::read_file(dir / "r.svg") == svg::reliability_svg(fixture_bins(), kNotes, "t"));
}

TEST_CASE("heatmap lists every model and criterion") {
    const auto specs = readiness::default_criteria();
    const auto r = readiness::score_checklist({{"transparency", 1.0}}, specs, "LR", "base");
    const auto out = svg::checklist_heatmap_svg({r});
    CHECK(out.find("LR") != std::string::npos);
    CHECK(out.find("C8") != std::string::npos);
    CHECK(out.find("2/16") != std::string::npos);
}
