#include <catch_amalgamated.hpp>

#include <cmath>

#include "famcure/predict.hpp"
#include "famcure/rng.hpp"
#include "famcure/validate.hpp"

using namespace famcure;

namespace {
const ParamSet kPi(5.0, 0.85, Weibull(8.0, 6.0));
}

TEST_CASE("posterior parameters") {
    Family prior_equiv("p", {SubjectRecord(0.0, 0), SubjectRecord(0.0, 0), SubjectRecord(0.0, 0)});
    const auto [shape0, rate0] = posterior_params(prior_equiv, kPi);
    REQUIRE(shape0 == 5.0);
    REQUIRE(rate0 == 5.0);

    Family one_event("e", {SubjectRecord(6.0, 1)});
    const auto [shape, rate] = posterior_params(one_event, kPi);
    REQUIRE(shape == 6.0);
    const double s06 = 0.85 + 0.15 * std::exp(-1.0);
    REQUIRE_THAT(rate, Catch::Matchers::WithinRel(5.0 - std::log(s06), 1e-13));
    REQUIRE_THAT(rate, Catch::Matchers::WithinAbs(5.099619343133629, 1e-9));
    REQUIRE(shape >= kPi.theta);
    REQUIRE(rate >= kPi.theta);
}

TEST_CASE("posterior mean") {
    Family prior_equiv("p", {SubjectRecord(0.0, 0)});
    REQUIRE(posterior_mean(prior_equiv, kPi) == 1.0);

    Family one_event("e", {SubjectRecord(6.0, 1)});
    REQUIRE_THAT(posterior_mean(one_event, kPi), Catch::Matchers::WithinAbs(1.1765584049089246, 1e-9));

    // a censored member at a large age adds to the rate and shrinks the mean
    Family extended = one_event;
    extended.members.emplace_back(9.0, 0);
    REQUIRE(posterior_mean(extended, kPi) < posterior_mean(one_event, kPi));
}

TEST_CASE("posterior median") {
    // Gamma(1, rate) is exponential with median ln2 / rate
    const ParamSet pi1(1.0, 0.85, Weibull(8.0, 6.0));
    Family censored("c", {SubjectRecord(7.0, 0)});
    const auto [shape, rate] = posterior_params(censored, pi1);
    REQUIRE(shape == 1.0);
    REQUIRE_THAT(posterior_median(censored, pi1),
                 Catch::Matchers::WithinRel(std::log(2.0) / rate, 1e-10));

    // independent bisection on the regularized gamma CDF
    Rng rng(21);
    for (int i = 0; i < 25; ++i) {
        const ParamSet pi = random_param_set(rng);
        const Family f = random_family(rng, pi);
        const auto [s, r] = posterior_params(f, pi);
        const double med = posterior_median(f, pi);
        double lo = 0.0, hi = 1e9;
        for (int it = 0; it < 300; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gamma_p(s, r * mid) < 0.5 ? lo : hi) = mid;
        }
        REQUIRE_THAT(med, Catch::Matchers::WithinAbs(0.5 * (lo + hi), 1e-9 * std::max(1.0, med)));
        REQUIRE(posterior_mean(f, pi) > med);  // gamma right-skew
    }
}

TEST_CASE("high-risk score calibration") {
    Family prior_equiv("p", {SubjectRecord(0.0, 0), SubjectRecord(0.0, 0)});
    for (double alpha : {0.01, 0.05, 0.2, 0.5}) {
        REQUIRE_THAT(high_risk_score(prior_equiv, kPi, alpha),
                     Catch::Matchers::WithinAbs(alpha, 1e-9));
    }
    Family one_event("e", {SubjectRecord(6.0, 1)});
    REQUIRE(high_risk_score(one_event, kPi, 1.0 - 1e-9) > 1.0 - 1e-6);

    // independent route: Monte Carlo from the posterior Gamma
    const double alpha = 0.05;
    const double score = high_risk_score(one_event, kPi, alpha);
    const auto [s, r] = posterior_params(one_event, kPi);
    const double q = prior_high_risk_threshold(kPi.theta, alpha);
    Rng rng(77);
    int exceed = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
        if (rng.gamma(s, r) > q) ++exceed;
    }
    const double mc = static_cast<double>(exceed) / n;
    const double se = std::sqrt(score * (1.0 - score) / n);
    REQUIRE(std::fabs(mc - score) < 4.0 * se);
}

TEST_CASE("score and mean increase with the event count") {
    std::vector<SubjectRecord> members{SubjectRecord(5.0, 0), SubjectRecord(6.0, 0),
                                       SubjectRecord(7.0, 0)};
    double prev_mean = 0.0, prev_score = 0.0;
    for (int k = 0; k <= 3; ++k) {
        auto with_k = members;
        for (int j = 0; j < k; ++j) with_k[static_cast<std::size_t>(j)].delta = 1;
        Family f("k", with_k);
        const double m = posterior_mean(f, kPi);
        const double sc = high_risk_score(f, kPi, 0.05);
        if (k > 0) {
            REQUIRE(m > prev_mean);
            REQUIRE(sc > prev_score);
        }
        prev_mean = m;
        prev_score = sc;
    }
}

TEST_CASE("classification threshold is strict") {
    REQUIRE(classify(0.05, 0.05) == 0);
    REQUIRE(classify(0.050000001, 0.05) == 1);
    REQUIRE(classify(1.0, 0.9999) == 1);
    REQUIRE_THROWS_AS(classify(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("posterior risk summary is self-consistent") {
    Family f("s", {SubjectRecord(4.5, 1), SubjectRecord(7.0, 0)});
    const PosteriorRisk r = posterior_risk(f, kPi, 0.05);
    REQUIRE(r.mean == r.shape / r.rate);
    REQUIRE(r.mean > r.median);
    REQUIRE_THAT(r.median, Catch::Matchers::WithinRel(posterior_median(f, kPi), 1e-12));
    REQUIRE_THAT(r.high_risk_score, Catch::Matchers::WithinRel(high_risk_score(f, kPi, 0.05), 1e-12));
}

TEST_CASE("conjugacy against the quadrature oracle") {
    const SuiteResult res = validate_conjugacy(40, 515);
    REQUIRE(res.pass);
    REQUIRE(res.worst < 1e-8);
}
