#include "rk/calibrate.hpp"
#include "rk/error.hpp"
#include "rk/metrics.hpp"
#include "rk/rng.hpp"

#include "oracle_values.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace rk;
using namespace rk::calibrate;

namespace {

double uniform(Rng& rng) { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; }

ScoreSet random_scores(Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Coarse grid so ties happen.
        p[i] = static_cast<double>(rng.below(21)) / 20.0;
        y[i] = uniform(rng) < p[i] * 0.8 + 0.1 ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    return test::scores(p, y);
}

} // namespace

TEST_CASE("platt fit matches the reference optimiser") {
    const auto s = test::scores({oracle::kPlattF.begin(), oracle::kPlattF.end()},
                                {oracle::kPlattY.begin(), oracle::kPlattY.end()});
    const auto cal = fit_platt(s);
    CHECK(cal.a == doctest::Approx(oracle::kPlattA).epsilon(1e-6));
    CHECK(cal.b == doctest::Approx(oracle::kPlattB).epsilon(1e-6));
    CHECK(cal.a < 0.0);
    double prev = 0.0;
    for (double f = 0.0; f <= 1.0; f += 0.05) {
        CHECK(cal(f) > prev);
        prev = cal(f);
    }
}

TEST_CASE("platt rejects single-class data") {
    CHECK_THROWS_AS(fit_platt(test::scores({0.1, 0.2}, {1, 1})), FitError);
}

TEST_CASE("isotonic fit matches the reference at the inputs") {
    const auto s = test::scores({oracle::kIsoX.begin(), oracle::kIsoX.end()},
                                {oracle::kIsoY.begin(), oracle::kIsoY.end()});
    const auto cal = fit_isotonic(s);
    for (std::size_t i = 0; i < oracle::kIsoX.size(); ++i)
        CHECK(cal(oracle::kIsoX[i]) == doctest::Approx(oracle::kIsoFitted[i]).epsilon(1e-12));
    CHECK(cal(-1.0) == cal(cal.lo()));
    CHECK(cal(2.0) == cal(cal.hi()));
}

TEST_CASE("isotonic pools a decreasing pair") {
    const auto cal = fit_isotonic(test::scores({0.2, 0.8}, {1, 0}));
    for (double x : {0.0, 0.2, 0.5, 0.8, 1.0}) CHECK(cal(x) == doctest::Approx(0.5));
}

TEST_CASE("pava hand cases") {
    CHECK(pava({1, 0, 1}, {1, 1, 1}) == std::vector<double>{0.5, 0.5, 1.0});
    CHECK(pava({0, 0.5, 1}, {1, 1, 1}) == std::vector<double>{0, 0.5, 1});
    const auto w = pava({1, 0}, {3, 1});
    CHECK(w[0] == doctest::Approx(0.75));
    CHECK(w[1] == doctest::Approx(0.75));
    CHECK(pava({}, {}).empty());
}

TEST_CASE("isotonic output is monotone and preserves the mean") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_scores(rng, 5 + rng.below(60));
        const auto cal = fit_isotonic(s);
        for (std::size_t i = 1; i < cal.thresholds.size(); ++i) {
            CHECK(cal.thresholds[i] > cal.thresholds[i - 1]);
            CHECK(cal.values[i] >= cal.values[i - 1]);
        }
        const auto out = calibrate::apply(Calibrator(cal), s);
        const double mean_in = std::accumulate(s.labels.begin(), s.labels.end(), 0.0) / s.size();
        const double mean_out = std::accumulate(out.probs.begin(), out.probs.end(), 0.0) / s.size();
        CHECK(mean_out == doctest::Approx(mean_in).epsilon(1e-12));
        // Ordering is preserved on the calibration inputs.
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = 0; j < s.size(); ++j)
                if (s.probs[i] < s.probs[j]) CHECK(out.probs[i] <= out.probs[j]);
    }
}

TEST_CASE("apply keeps labels, tags and cohort") {
    auto s = test::scores({0.1, 0.4, 0.9}, {0, 1, 1});
    s.tags["dm"] = {"yes", "no", "yes"};
    s.meta = {"LR", "base", "external"};
    const auto out = calibrate::apply(Calibrator(PlattCalibrator{-2.0, 1.0, 0}), s);
    CHECK(out.labels == s.labels);
    CHECK(out.tags == s.tags);
    CHECK(out.meta.cohort == "external");
    CHECK(out.meta.variant == kPlatt);
    CHECK(out.probs[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * 0.1 + 1.0))));
}

TEST_CASE("variant selection takes the lowest test ECE and breaks ties toward base") {
    // One negative row: ECE equals its probability.
    std::map<std::string, ScoreSet> m{{kBase, test::scores({0.3}, {0})},
                                      {kPlatt, test::scores({0.1}, {0})},
                                      {kIsotonic, test::scores({0.2}, {0})}};
    const auto sel = select_best_variant(m);
    CHECK(sel.chosen == kPlatt);
    CHECK(sel.test_ece.at(kPlatt) == doctest::Approx(0.1));
    CHECK(!sel.rationale.empty());

    m[kBase] = test::scores({0.2}, {0});
    m[kPlatt] = test::scores({0.2}, {0});
    CHECK(select_best_variant(m).chosen == kBase);
    m.erase(kBase);
    CHECK(select_best_variant(m).chosen == kPlatt);
}

TEST_CASE("calibration drift is external minus internal") {
    const auto internal = test::scores({0.1}, {0});
    const auto external = test::scores({0.4}, {0});
    CHECK(calibration_drift(internal, external) == doctest::Approx(0.3));
    CHECK(calibration_drift(external, internal) == doctest::Approx(-0.3));
}

TEST_CASE("calibrator files round-trip") {
    const Calibrator p = PlattCalibrator{-3.25, 1.0 / 3.0, 7};
    CHECK(calibrator_from_text(calibrator_to_text(p)) == p);
    const Calibrator iso = fit_isotonic(test::scores({oracle::kIsoX.begin(), oracle::kIsoX.end()},
                                                     {oracle::kIsoY.begin(), oracle::kIsoY.end()}));
    CHECK(calibrator_from_text(calibrator_to_text(iso)) == iso);
    CHECK_THROWS_AS(calibrator_from_text("kind = nope\n"), ParseError);
}
