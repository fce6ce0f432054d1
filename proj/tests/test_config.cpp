#include "rk/config.hpp"
#include "rk/error.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace rk;
using namespace rk::pipeline;

TEST_CASE("the shipped config parses") {
    const auto cfg = load_config(test::source_dir() / "config/default.cfg");
    CHECK(cfg.seed == 42);
    CHECK(cfg.alpha == 0.1);
    CHECK(cfg.test_size == 61);
    CHECK(cfg.valid_size == 60);
    CHECK(cfg.models == std::vector<ModelEntry>{{"LR", "native-lr"}, {"NB", "native-gnb"}});
    CHECK(cfg.out_path() == test::source_dir() / "config" / ".." / "out");
}

TEST_CASE("canonical text round-trips") {
    const auto cfg = parse_config(
        "# comment\n"
        "seed = 7\n"
        "alpha = 0.2\n"
        "subgroups = age_group, dm=yes\n"
        "models = LR,RF\n"
        "model.LR = native-lr\n"
        "model.RF = scores:fixtures/rf\n"
        "lr_grid = 0.5, 2\n"
        "threshold.C1 = 0.8\n");
    CHECK(cfg.seed == 7);
    CHECK(cfg.subgroups == std::vector<std::string>{"age_group", "dm=yes"});
    CHECK(cfg.models[1].score_dir() == "fixtures/rf");
    CHECK(cfg.lr_grid == std::vector<double>{0.5, 2.0});
    CHECK(cfg.criteria()[0].threshold == 0.8);
    CHECK(cfg.criteria()[1].threshold == 0.10);
    const auto again = parse_config(config_to_text(cfg));
    CHECK(again == cfg);
    CHECK(config_to_text(again) == config_to_text(cfg));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("seed 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("alpha = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("alpha = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("models = LR\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.LR = native-lr\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("models = LR\nmodel.LR = magic\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("threshold.C9 = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("impute_stats = test\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("standardize = maybe\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/readiness.cfg"), ConfigError);
    try {
        parse_config("seed = 1\n\nalpha = x\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}
