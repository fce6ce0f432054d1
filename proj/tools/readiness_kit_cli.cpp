// readiness-kit command line. Links only the C API.
#include "readiness_kit.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

constexpr const char* kCommands[] = {"ingest",   "train",    "evaluate",  "calibrate", "conformal",
                                     "subgroup", "checklist", "report",   "all"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibration, conformal and deployment-readiness pipeline for binary risk models", "readiness-kit"};
    app.set_version_flag("--version", std::string(rk_version()));
    app.require_subcommand(1, 1);

    std::string config;
    long long seed = -1;
    std::string out_dir;
    std::string metrics;
    for (const char* name : kCommands) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        if (std::string(name) == "all") sub->description("run every stage in order");
        sub->add_option("--config", config, "pipeline config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the configured seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out_dir, "override the output directory");
        if (std::string(name) == "checklist") {
            sub->add_option("--metrics", metrics, "score published metric values from this JSON")
                ->check(CLI::ExistingFile);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto* sub = app.get_subcommands().front();
    rk_run_options opts{};
    opts.has_seed = seed >= 0;
    opts.seed = seed >= 0 ? static_cast<uint64_t>(seed) : 0;
    opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
    opts.metrics_path = metrics.empty() ? nullptr : metrics.c_str();

    char* log = nullptr;
    const rk_status st = rk_pipeline_run(config.c_str(), sub->get_name().c_str(), &opts, &log);
    if (st != RK_OK) {
        std::fprintf(stderr, "readiness-kit %s: %s: %s\n", sub->get_name().c_str(), rk_status_name(st),
                     rk_last_error());
        return rk_status_is_validation(st) ? 2 : 1;
    }
    if (log) std::fputs(log, stdout);
    rk_string_free(log);
    return 0;
}
