#include "rk/conformal.hpp"
#include "rk/error.hpp"
#include "rk/rng.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace rk;
using namespace rk::conformal;

namespace {

ConformalModel with_q(double q) {
    ConformalModel m;
    m.q_hat = q;
    return m;
}

} // namespace

TEST_CASE("lac score is one minus the class probability") {
    CHECK(lac_score(0.7, 1) == doctest::Approx(0.3));
    CHECK(lac_score(0.7, 0) == doctest::Approx(0.7));
    CHECK(lac_score(0.0, 0) == 0.0);
}

TEST_CASE("q_hat takes the ceil((n+1)(1-alpha))-th smallest score") {
    // True-class scores 0.1 .. 0.9.
    std::vector<double> p;
    std::vector<int> y;
    for (int i = 1; i <= 9; ++i) {
        p.push_back(1.0 - i / 10.0);
        y.push_back(1);
    }
    const auto m = fit_conformal(test::scores(p, y), 0.1);
    CHECK(m.rank == 9);
    CHECK(m.q_hat == doctest::Approx(0.9));
    CHECK(!m.degenerate);

    const auto m2 = fit_conformal(test::scores(p, y), 0.5);
    CHECK(m2.rank == 5);
    CHECK(m2.q_hat == doctest::Approx(0.5));
}

TEST_CASE("too few calibration rows give the full set") {
    const auto m = fit_conformal(test::scores({0.9, 0.8, 0.7, 0.6, 0.55}, {1, 1, 1, 1, 1}), 0.1);
    CHECK(m.degenerate);
    CHECK(m.q_hat == 1.0);
    CHECK(predict_set(m, 0.999).size() == 2);
}

TEST_CASE("set construction") {
    CHECK(predict_set(with_q(0.4), 0.7) == PredictionSet{true, false});
    CHECK(predict_set(with_q(0.05), 0.5).size() == 0);
    CHECK(predict_set(with_q(1.0), 0.0).size() == 2);
    CHECK(predict_set(with_q(1.0), 1.0).size() == 2);
    CHECK(predict_set(with_q(0.5), 0.5).size() == 2);
    CHECK_THROWS_AS(fit_conformal(test::scores({0.5}, {1}), 0.0), ArgumentError);
    CHECK_THROWS_AS(fit_conformal(test::scores({0.5}, {1}), 1.0), ArgumentError);
}

TEST_CASE("sets grow with q_hat") {
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const double p = static_cast<double>(rng.below(1001)) / 1000.0;
        const double q1 = static_cast<double>(rng.below(1001)) / 1000.0;
        const double q2 = std::min(1.0, q1 + static_cast<double>(rng.below(300)) / 1000.0);
        const auto a = predict_set(with_q(q1), p);
        const auto b = predict_set(with_q(q2), p);
        CHECK((!a.contains_pos || b.contains_pos));
        CHECK((!a.contains_neg || b.contains_neg));
    }
}

TEST_CASE("coverage report identities") {
    const auto m = with_q(0.4);
    // Sets: 0.9 -> {1}, 0.1 -> {0}, 0.5 -> {}, 0.65 -> {1}, 0.35 -> {0}.
    const auto s = test::scores({0.9, 0.1, 0.5, 0.65, 0.35}, {1, 1, 0, 0, 0});
    const auto r = coverage_report(m, s);
    CHECK(r.n == 5);
    CHECK(r.coverage == doctest::Approx(2.0 / 5.0));
    CHECK(r.singleton_rate == doctest::Approx(4.0 / 5.0));
    CHECK(r.empty_rate == doctest::Approx(1.0 / 5.0));
    CHECK(r.ambiguous_rate == doctest::Approx(0.0));
    CHECK(r.empty_rate + r.singleton_rate + r.ambiguous_rate == doctest::Approx(1.0));
    CHECK(r.avg_set_size == doctest::Approx(r.singleton_rate + 2.0 * r.ambiguous_rate));

    const auto csv = sets_to_csv(m, s);
    CHECK(csv.rfind("row_id,prob,label,in_set_pos,in_set_neg,covered", 0) == 0);
}

TEST_CASE("coverage drift") {
    CoverageReport a, b;
    a.coverage = 0.9;
    b.coverage = 0.5;
    CHECK(coverage_drift(a, b) == doctest::Approx(0.4));
}

TEST_CASE("finite-sample coverage on exchangeable draws") {
    Rng rng(99);
    double total = 0.0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> p(140);
        std::vector<int> y(140);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
            y[i] = static_cast<double>(rng.next() >> 11) * 0x1.0p-53 < p[i] ? 1 : 0;
        }
        std::vector<std::size_t> cal(100), test(40);
        std::iota(cal.begin(), cal.end(), 0);
        std::iota(test.begin(), test.end(), 100);
        const auto all = test::scores(p, y);
        total += coverage_report(fit_conformal(all.subset(cal), 0.1), all.subset(test)).coverage;
    }
    CHECK(total / trials >= 0.88);
}

TEST_CASE("conformal model file round-trips") {
    const auto m = fit_conformal(test::scores({0.9, 0.2, 0.7, 0.3, 0.6, 0.8, 0.1, 0.4, 0.55, 0.45}, {1, 0, 1, 0, 1, 1, 0, 0, 0, 1}), 0.2);
    CHECK(model_from_text(model_to_text(m)) == m);
    CHECK_THROWS_AS(model_from_text(""), ParseError);
}
