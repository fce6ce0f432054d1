#pragma once

#include "rk/config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rk::pipeline {

enum class Stage { Ingest, Train, Evaluate, Calibrate, Conformal, Subgroup, Checklist, Report, All };

const char* to_string(Stage s) noexcept;
// Throws ArgumentError for an unknown name.
Stage stage_from_string(const std::string& name);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    // Checklist only: score published metric values from this JSON instead of
    // the pipeline's own tables.
    std::string metrics_path;
};

struct StageResult {
    Stage stage = Stage::Ingest;
    std::vector<std::string> outputs; // relative to the output directory, sorted
    std::string summary;              // one line for the console
};

PipelineConfig with_overrides(PipelineConfig cfg, const RunOptions& opts);

// Runs one stage, or every stage in order for Stage::All. A stage whose inputs
// are missing throws MissingArtifact naming the subcommand to run first.
std::vector<StageResult> run(const PipelineConfig& cfg, Stage stage, const RunOptions& opts = {});

std::string sha256_hex(std::string_view data);

// Digest over the per-stage file list recorded in manifest.json; excludes the
// timestamp and config snapshot.
std::string manifest_digest(const std::filesystem::path& manifest_path);

} // namespace rk::pipeline
