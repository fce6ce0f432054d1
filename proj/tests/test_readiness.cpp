#include "rk/error.hpp"
#include "rk/readiness.hpp"
#include "rk/rng.hpp"
#include "rk/text.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace rk;
using namespace rk::readiness;

namespace {

const CriterionSpec& spec(const std::string& id) {
    static const auto specs = default_criteria();
    for (const auto& s : specs)
        if (s.id == id) return s;
    throw std::logic_error(id);
}

std::string letters(const ChecklistReport& r) {
    std::string out;
    for (const auto& c : r.criteria) out += letter(c.status);
    return out;
}

CriterionInputs all_pass() {
    return {{"external_auroc", 0.9},     {"external_ece", 0.05},           {"calibration_drift", -0.01},
            {"external_coverage", 0.92}, {"coverage_drift", 0.02},         {"external_singleton_rate", 0.8},
            {"subgroup_ece_gap", 0.03},  {"transparency", 1.0}};
}

} // namespace

TEST_CASE("criterion bands") {
    CHECK(evaluate_criterion(spec("C2"), 0.115).status == Status::Marginal);
    CHECK(evaluate_criterion(spec("C2"), 0.10).status == Status::Pass);
    CHECK(evaluate_criterion(spec("C2"), 0.121).status == Status::Fail);
    CHECK(evaluate_criterion(spec("C1"), 0.485).status == Status::Fail);
    CHECK(evaluate_criterion(spec("C1"), 0.85).status == Status::Pass);
    CHECK(evaluate_criterion(spec("C1"), 0.70).status == Status::Marginal);
    CHECK(evaluate_criterion(spec("C3"), -0.04).status == Status::Pass);
    CHECK(evaluate_criterion(spec("C3"), -0.739).status == Status::Fail);

    const auto undefined = evaluate_criterion(spec("C4"), std::nullopt);
    CHECK(undefined.status == Status::Fail);
    CHECK(!undefined.reason.empty());
    CHECK(evaluate_criterion(spec("C4"), std::nan("")).status == Status::Fail);
    CHECK(evaluate_criterion(spec("C8"), 1.0).status == Status::Pass);
    CHECK(evaluate_criterion(spec("C8"), 0.0).status == Status::Fail);

    CHECK(points(Status::Pass) == 2);
    CHECK(points(Status::Marginal) == 1);
    CHECK(points(Status::Fail) == 0);
}

TEST_CASE("published inputs reproduce the published checklist") {
    const auto models = inputs_from_json(text::read_file(test::source_dir() / "config/published_metrics.json"));
    REQUIRE(models.size() == 5);
    const std::map<std::string, std::pair<std::string, int>> expected{
        {"LR", {"FFFFFPFP", 4}}, {"RF", {"FFFFFPFP", 4}}, {"XGB", {"FFFFFFFP", 2}},
        {"SVM", {"FFFFFPFP", 4}}, {"NB", {"FFFFFPFP", 4}}};
    for (const auto& m : models) {
        const auto r = score_checklist(m.inputs, default_criteria(), m.model, m.variant);
        CAPTURE(m.model);
        CHECK(letters(r) == expected.at(m.model).first);
        CHECK(r.total == expected.at(m.model).second);
        CHECK(r.max_total == 16);
    }
}

TEST_CASE("scoring totals and monotonicity") {
    const auto specs = default_criteria();
    const auto full = score_checklist(all_pass(), specs);
    CHECK(full.total == 16);
    auto no_flag = all_pass();
    no_flag["transparency"] = 0.0;
    CHECK(score_checklist(no_flag, specs).total == 14);
    no_flag.erase("transparency");
    CHECK(score_checklist(no_flag, specs).total == 14);

    // Moving one input toward passing never lowers the total.
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        CriterionInputs in;
        for (const auto& s : specs)
            in[s.metric] = s.automatic ? double(rng.below(2)) : static_cast<double>(rng.below(1001)) / 1000.0;
        const auto before = score_checklist(in, specs);
        int sum = 0;
        for (const auto& c : before.criteria) sum += c.points;
        CHECK(before.total == sum);
        const auto& s = specs[rng.below(7)];
        const double step = static_cast<double>(rng.below(200)) / 1000.0;
        double v = *in[s.metric];
        if (s.absolute) v = std::abs(v);
        in[s.metric] = s.direction == Direction::AtLeast ? v + step : std::max(0.0, v - step);
        CHECK(score_checklist(in, specs).total >= before.total);
    }
}

TEST_CASE("subgroup gap") {
    auto s = test::scores(std::vector<double>(20, 0.5), std::vector<int>(20, 0));
    for (int i = 0; i < 10; ++i) s.probs[i] = 0.1;
    for (int i = 10; i < 20; ++i) s.labels[i] = i < 19 ? 1 : 0;
    s.tags["grp"].assign(20, "a");
    for (int i = 10; i < 20; ++i) s.tags["grp"][i] = "b";
    // a: ECE 0.1. b: mean prob 0.5, 9 of 10 positive, ECE 0.4.
    const auto r = subgroup_ece(s, {GroupSelector::parse("grp")}, 5, 10);
    REQUIRE(r.groups.size() == 2);
    CHECK(r.gap == doctest::Approx(0.3));

    // Renaming levels leaves the gap alone.
    auto renamed = s;
    for (auto& v : renamed.tags["grp"]) v = v == "a" ? "zz" : "aa";
    CHECK(subgroup_ece(renamed, {GroupSelector::parse("grp")}, 5, 10).gap == doctest::Approx(r.gap));

    const auto one = subgroup_ece(s, {GroupSelector::parse("grp=a")}, 5, 10);
    CHECK(one.gap == 0.0);

    // Raising the floor above b's size excludes it; the gap is then over a alone.
    s.tags["grp"][10] = "a";
    const auto ex = subgroup_ece(s, {GroupSelector::parse("grp")}, 5, 10);
    CHECK(ex.groups[1].excluded);
    CHECK(!ex.groups[1].ece);
    CHECK(ex.gap == 0.0);

    CHECK_THROWS_AS(subgroup_ece(s, {GroupSelector::parse("grp")}, 5, 50), UndefinedMetric);
    CHECK_THROWS_AS(subgroup_ece(s, {GroupSelector::parse("nope")}, 5, 10), SchemaError);
}

TEST_CASE("selectors parse and print") {
    const auto a = GroupSelector::parse("dm=yes");
    CHECK(a.key == "dm");
    CHECK(a.value == "yes");
    CHECK(a.to_string() == "dm=yes");
    CHECK(!GroupSelector::parse("age_group").value);
}

TEST_CASE("checklist outputs") {
    const auto specs = default_criteria();
    const std::vector<ChecklistReport> reps{score_checklist(all_pass(), specs, "LR", "base")};
    const auto j = nlohmann::json::parse(checklist_to_json(reps, specs));
    const auto& first = j["models"][0];
    CHECK(first["total"] == 16);
    CHECK(first["criteria"].size() == 8);
    CHECK(first["criteria"][0]["status"] == "PASS");
    CHECK(first["criteria"][0]["threshold"] == 0.85);
    const auto csv = checklist_to_csv(reps, specs);
    CHECK(csv.rfind("model,variant,C1,C2,C3,C4,C5,C6,C7,C8,total", 0) == 0);
    CHECK(heatmap_csv(reps).find("LR,C8,PASS,2") != std::string::npos);
}

TEST_CASE("metric JSON errors") {
    CHECK_THROWS_AS(inputs_from_json("{"), ParseError);
    CHECK_THROWS_AS(inputs_from_json("{\"models\": 3}"), ParseError);
}
