#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "famcure/io.hpp"
#include "famcure/metrics.hpp"
#include "famcure/simulate.hpp"
#include "../support/stats.hpp"

using namespace famcure;

namespace {
Scenario base_scenario(std::size_t n, std::uint64_t seed) {
    return Scenario(n, 5, 0.8, ParamSet(0.5, 0.85, Weibull(8.0, 6.0)), seed);
}
}

TEST_CASE("family size draw") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) REQUIRE(draw_family_size(rng, 1, 2.5) == 1);

    // empirical mean vs exact enumeration of 1 + min(4, Pois(0.8))
    double expected = 0.0;
    double pk = std::exp(-0.8);
    double tail = 1.0;
    for (int k = 0; k < 4; ++k) {
        expected += k * pk;
        tail -= pk;
        pk *= 0.8 / (k + 1);
    }
    expected += 4.0 * tail + 1.0;
    Rng rng2(4);
    double sum = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) sum += draw_family_size(rng2, 5, 0.8);
    REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(expected, 3e-3));

    // truncation at two members: P(size = 2) = 1 - exp(-0.8)
    Rng rng3(5);
    int twos = 0;
    for (int i = 0; i < n; ++i) {
        const int s = draw_family_size(rng3, 2, 0.8);
        REQUIRE((s == 1 || s == 2));
        twos += s == 2;
    }
    const double p2 = 1.0 - std::exp(-0.8);
    REQUIRE_THAT(static_cast<double>(twos) / n,
                 Catch::Matchers::WithinAbs(p2, 4.0 * std::sqrt(p2 * (1 - p2) / n)));
}

TEST_CASE("frailty draws follow the prior") {
    Rng rng(6);
    const double theta = 0.5;
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = draw_frailty(rng, theta);
        sum += r;
        sumsq += r * r;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(1.0, 3.0 * std::sqrt(1.0 / theta / n)));
    REQUIRE_THAT(var, Catch::Matchers::WithinAbs(1.0 / theta, 0.03));

    Rng rng2(7);
    std::vector<double> sample(100000);
    for (auto& v : sample) v = draw_frailty(rng2, theta);
    const auto ks = testsupport::ks_test(sample, [&](double r) { return gamma_p(theta, theta * r); });
    REQUIRE(ks.p_value >= 0.01);
}

TEST_CASE("event time draw: non-susceptible fraction and conditional law") {
    const CureRateParams cure(0.85, Weibull(8.0, 6.0));
    Rng rng(8);
    const double r = 2.0;
    const int n = 1'000'000;
    int cured = 0;
    for (int i = 0; i < n; ++i) {
        if (!draw_event_time(rng, cure, r)) ++cured;
    }
    const double pr = std::pow(0.85, r);
    REQUIRE_THAT(static_cast<double>(cured) / n,
                 Catch::Matchers::WithinAbs(pr, 3.0 * std::sqrt(pr * (1 - pr) / n)));

    // susceptible times follow the conditional survival (s0^r - p^r)/(1 - p^r)
    for (double rr : {0.5, 1.0, 2.0}) {
        Rng rng2(9 + static_cast<std::uint64_t>(rr * 10));
        std::vector<double> times;
        while (times.size() < 100000) {
            const auto t = draw_event_time(rng2, cure, rr);
            if (t) times.push_back(*t);
        }
        const double prr = std::pow(0.85, rr);
        const auto ks = testsupport::ks_test(times, [&](double t) {
            return (1.0 - std::pow(s0(cure, t), rr)) / (1.0 - prr);
        });
        INFO("r = " << rr << " D = " << ks.statistic);
        REQUIRE(ks.p_value >= 0.01);
    }
}

TEST_CASE("weibull frailty draw reduces to a rescaled weibull as p vanishes") {
    const double k = 8.0, lam = 6.0, r = 2.0;
    const CureRateParams cure(1e-12, Weibull(k, lam));
    Rng rng(10);
    std::vector<double> times;
    while (times.size() < 100000) {
        const auto t = draw_event_time(rng, cure, r);
        if (t) times.push_back(*t);
    }
    // S_r(t) = exp(-r (t/lam)^k) is Weibull with scale lam * r^(-1/k)
    const double scale_r = lam * std::pow(r, -1.0 / k);
    const auto ks = testsupport::ks_test(
        times, [&](double t) { return 1.0 - std::exp(-std::pow(t / scale_r, k)); });
    REQUIRE(ks.p_value >= 0.01);
}

TEST_CASE("calendar draws") {
    Scenario sc = base_scenario(10, 3);
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        const auto cal = draw_calendar(rng, sc, 4);
        REQUIRE(cal.size() == 4);
        const double mother = cal[1].birth_year;
        REQUIRE(mother >= 1905.0);
        REQUIRE(mother <= 1945.0);
        for (std::size_t j : {std::size_t{0}, std::size_t{2}, std::size_t{3}}) {
            REQUIRE(cal[j].birth_year >= mother + 25.0);
            REQUIRE(cal[j].birth_year <= mother + 35.0);
        }
        for (const auto& e : cal) {
            REQUIRE(e.censor_age >= 0.0);
            REQUIRE(e.censor_age <= 2020.0 - 1905.0);
        }
    }
}

TEST_CASE("earlier birth means longer administrative follow-up") {
    Scenario sc = base_scenario(400, 12);
    sc.censoring.enabled = false;  // administrative censoring only
    const Registry reg = simulate_registry(sc, 1);
    std::vector<double> births, censor_ages;
    for (const auto& f : reg.families) {
        for (const auto& m : f.members) {
            births.push_back(*m.birth_year);
            if (m.delta == 0) censor_ages.push_back(m.x);
            else censor_ages.push_back(2020.0 - *m.birth_year);
        }
    }
    const auto rho = rank_rho(births, censor_ages);
    REQUIRE(rho.has_value());
    REQUIRE_THAT(*rho, Catch::Matchers::WithinAbs(-1.0, 1e-12));
}

TEST_CASE("registry generation is deterministic across thread counts") {
    Scenario sc = base_scenario(300, 99);
    const Registry a = simulate_registry(sc, 1);
    const Registry b = simulate_registry(sc, 2);
    std::ostringstream osa, osb;
    write_families_csv(osa, a.families);
    write_families_csv(osb, b.families);
    REQUIRE(osa.str() == osb.str());

    const Registry c = simulate_registry(sc, 1);
    std::ostringstream osc;
    write_families_csv(osc, c.families);
    REQUIRE(osc.str() == osa.str());
}

TEST_CASE("registry observations are consistent") {
    Scenario sc = base_scenario(2000, 17);
    const Registry reg = simulate_registry(sc, 2);
    REQUIRE(reg.families.size() == 2000);
    REQUIRE(reg.fh_labels.size() == 2000);
    int events = 0;
    for (const auto& f : reg.families) {
        REQUIRE(f.true_frailty.has_value());
        REQUIRE(f.members.size() >= 1);
        REQUIRE(f.members.size() <= 5);
        REQUIRE(f.members[0].role == Role::main);
        for (const auto& m : f.members) {
            REQUIRE(m.x >= 0.0);
            REQUIRE(std::isfinite(m.x));
            if (m.delta == 1) {
                ++events;
                REQUIRE(m.event_year.has_value());
                REQUIRE_THAT(*m.event_year - *m.birth_year, Catch::Matchers::WithinAbs(m.x, 1e-9));
            } else {
                REQUIRE_FALSE(m.event_year.has_value());
            }
        }
    }
    // heavy censoring regime: events are a small minority
    const double total = static_cast<double>([&] {
        std::size_t c = 0;
        for (const auto& f : reg.families) c += f.members.size();
        return c;
    }());
    REQUIRE(events > 0);
    REQUIRE(events / total < 0.30);
}

TEST_CASE("unlimited follow-up recovers the marginal cure fraction") {
    Scenario sc(20000, 1, 0.5, ParamSet(0.5, 0.85, Weibull(8.0, 6.0)), 23);
    sc.censoring.enabled = false;
    sc.follow_up_end = 1e9;  // effectively infinite follow-up
    const Registry reg = simulate_registry(sc, 2);
    int no_event = 0;
    for (const auto& f : reg.families) no_event += f.members[0].delta == 0;
    const double pm = marginal_cure(0.5, 0.85);
    const double frac = static_cast<double>(no_event) / static_cast<double>(reg.families.size());
    REQUIRE_THAT(frac, Catch::Matchers::WithinAbs(pm, 3.0 * std::sqrt(pm * (1 - pm) / 20000.0)));
}

TEST_CASE("within-family clustering weakens as theta grows") {
    auto dispersion = [](double theta) {
        Scenario sc(6000, 4, 100.0, ParamSet(theta, 0.85, Weibull(8.0, 6.0)), 31);
        sc.censoring.enabled = false;
        sc.follow_up_end = 1e9;
        const Registry reg = simulate_registry(sc, 2);
        std::vector<double> counts;
        double events = 0.0, subjects = 0.0;
        for (const auto& f : reg.families) {
            counts.push_back(static_cast<double>(event_count(f)));
            events += counts.back();
            subjects += static_cast<double>(f.members.size());
        }
        const double phat = events / subjects;
        const double m = 4.0;
        double var = 0.0;
        const double mean = events / static_cast<double>(counts.size());
        for (double c : counts) var += (c - mean) * (c - mean);
        var /= static_cast<double>(counts.size() - 1);
        return var / (m * phat * (1.0 - phat));  // binomial dispersion index
    };
    const double d_small = dispersion(0.2);
    const double d_mid = dispersion(5.0);
    const double d_large = dispersion(50.0);
    REQUIRE(d_small > d_mid);
    REQUIRE(d_mid > d_large);
    REQUIRE(d_small > 1.2);
    REQUIRE_THAT(d_large, Catch::Matchers::WithinAbs(1.0, 0.12));
}

TEST_CASE("fh change age matches the calendar bookkeeping") {
    Scenario sc = base_scenario(3000, 41);
    const Registry reg = simulate_registry(sc, 1);
    bool found = false;
    for (std::size_t i = 0; i < reg.families.size(); ++i) {
        const Family& f = reg.families[i];
        const FhLabel& label = reg.fh_labels[i];
        double first_event_year = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < f.members.size(); ++j) {
            if (f.members[j].delta == 1) {
                first_event_year = std::min(first_event_year, *f.members[j].event_year);
            }
        }
        if (std::isfinite(first_event_year)) {
            found = true;
            REQUIRE(label.fh_end == 1);
            const double expected = std::max(0.0, first_event_year - *f.members[0].birth_year);
            REQUIRE_THAT(*label.fh_change_age, Catch::Matchers::WithinAbs(expected, 1e-9));
        } else {
            REQUIRE(label.fh_end == 0);
        }
    }
    REQUIRE(found);
}

TEST_CASE("scenario validation") {
    REQUIRE_THROWS_AS(Scenario(0, 5, 0.8, ParamSet(0.5, 0.85, Weibull(8, 6)), 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(Scenario(10, 0, 0.8, ParamSet(0.5, 0.85, Weibull(8, 6)), 1),
                      std::invalid_argument);
    Rng rng(1);
    REQUIRE_THROWS_AS(draw_frailty(rng, 0.0), std::invalid_argument);
    const CureRateParams cure(0.85, Weibull(8.0, 6.0));
    REQUIRE_THROWS_AS(draw_event_time(rng, cure, -1.0), std::invalid_argument);
}
