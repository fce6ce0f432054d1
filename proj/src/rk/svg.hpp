#pragma once

#include "rk/metrics.hpp"
#include "rk/readiness.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rk::svg {

using Annotations = std::vector<std::pair<std::string, std::string>>;

// Reliability diagram: mean predicted probability (x) against fraction of
// positives (y), a dashed diagonal, one marker per non-empty bin, and an inset
// listing `annotations` in order. Output depends only on the arguments.
std::string reliability_svg(const metrics::ReliabilityBins& bins, const Annotations& annotations,
                            const std::string& title);

void render_reliability_svg(const metrics::ReliabilityBins& bins, const Annotations& annotations,
                            const std::string& title, const std::filesystem::path& out);

// Model x criterion grid coloured by status.
std::string checklist_heatmap_svg(const std::vector<readiness::ChecklistReport>& reports);

} // namespace rk::svg
