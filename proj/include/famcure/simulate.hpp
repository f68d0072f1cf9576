#pragma once

// Synthetic family-registry generation: shared frailty per family, truncated
// Poisson family sizes, susceptible/non-susceptible event times by inverse
// transform, calendar birthdays with administrative right censoring, and
// family-history labels.
//
// Each family consumes its own RNG stream keyed on (seed, family index) with
// a fixed within-family draw order, so output is byte-identical across runs
// and thread counts.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "famcure/data.hpp"
#include "famcure/parallel.hpp"
#include "famcure/rng.hpp"

namespace famcure {

struct CensoringConfig {
    bool enabled = true;           // death and loss-to-follow-up processes
    double death_log_mean = std::log(82.0);
    double death_log_sd = 0.15;
    double death_cap = 110.0;
    double lost_mean = 200.0;      // exponential mean, rare by default
};

struct Scenario {
    std::size_t n_families = 1000;
    int n_f = 5;                   // maximum number of female members
    double lambda_f = 0.8;         // Poisson mean, pre-truncation
    ParamSet true_params;
    double follow_up_end = 2020.0;
    double mother_birth_lo = 1905.0, mother_birth_hi = 1945.0;
    double maternal_age_lo = 25.0, maternal_age_hi = 35.0;
    std::uint64_t seed = 1;
    CensoringConfig censoring;

    Scenario(std::size_t n_families_, int n_f_, double lambda_f_, ParamSet true_params_,
             std::uint64_t seed_)
        : n_families(n_families_), n_f(n_f_), lambda_f(lambda_f_),
          true_params(std::move(true_params_)), seed(seed_) {
        detail::require(n_families >= 1, "Scenario: n_families must be >= 1");
        detail::require(n_f >= 1, "Scenario: n_f must be >= 1");
        detail::require(lambda_f > 0.0, "Scenario: lambda_f must be positive");
    }
};

/// Family size 1 + min(n_f - 1, Poisson(lambda_f)); support {1, ..., n_f}.
inline int draw_family_size(Rng& rng, int n_f, double lambda_f) {
    if (n_f < 1) throw std::invalid_argument("draw_family_size: n_f must be >= 1");
    return 1 + std::min(n_f - 1, rng.poisson(lambda_f));
}

/// Shared frailty draw from the Gamma(theta, theta) prior.
inline double draw_frailty(Rng& rng, double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("draw_frailty: theta must be positive");
    return rng.gamma(theta, theta);
}

/// Event time under frailty r: with probability p^r the subject is
/// non-susceptible (nullopt); otherwise the susceptible time is drawn by
/// inverting the conditional survival, t = S~^-1((u^(1/r) - p) / (1 - p)).
inline std::optional<double> draw_event_time(Rng& rng, const CureRateParams& c, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("draw_event_time: r must be positive");
    const double u = rng.uniform();
    const double log_u = std::log(u);
    if (log_u <= r * std::log(c.p)) return std::nullopt;
    double st = (std::exp(log_u / r) - c.p) / (1.0 - c.p);
    st = std::min(std::max(st, 1e-300), 1.0 - 1e-16);
    return quantile_survival(c.baseline, st);
}

struct CalendarEntry {
    double birth_year = 0.0;
    double censor_age = 0.0;
};

/// Birthdays and censoring ages for one family. Member 0 is the main subject
/// (a daughter); member 1, when present, is the mother; further members are
/// sisters. Daughters are born a maternal-age offset after the mother.
inline std::vector<CalendarEntry> draw_calendar(Rng& rng, const Scenario& sc, int family_size) {
    if (family_size < 1) throw std::invalid_argument("draw_calendar: family_size must be >= 1");
    const double mother_birth = rng.uniform(sc.mother_birth_lo, sc.mother_birth_hi);
    std::vector<CalendarEntry> entries(static_cast<std::size_t>(family_size));
    for (int j = 0; j < family_size; ++j) {
        double birth;
        if (j == 1) {
            birth = mother_birth;
        } else {
            birth = mother_birth + rng.uniform(sc.maternal_age_lo, sc.maternal_age_hi);
        }
        double censor_age = std::max(0.0, sc.follow_up_end - birth);
        if (sc.censoring.enabled) {
            const double death = std::min(
                std::exp(sc.censoring.death_log_mean + sc.censoring.death_log_sd * rng.normal()),
                sc.censoring.death_cap);
            const double lost = rng.exponential(sc.censoring.lost_mean);
            censor_age = std::min({censor_age, death, lost});
        }
        entries[static_cast<std::size_t>(j)] = {birth, censor_age};
    }
    return entries;
}

struct Registry {
    std::vector<Family> families;
    std::vector<FhLabel> fh_labels;  // aligned with families; label of the main subject
};

namespace detail {

inline Family simulate_family(const Scenario& sc, std::size_t index) {
    Rng rng = Rng::stream(sc.seed, index);
    const int size = draw_family_size(rng, sc.n_f, sc.lambda_f);
    const double r = draw_frailty(rng, sc.true_params.theta);
    const CureRateParams cure = sc.true_params.cure();
    const auto calendar = draw_calendar(rng, sc, size);

    Family fam;
    fam.id = std::to_string(index);
    fam.true_frailty = r;
    fam.members.resize(static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j) {
        auto& rec = fam.members[static_cast<std::size_t>(j)];
        rec.role = j == 0 ? Role::main : (j == 1 ? Role::mother : Role::sister);
        rec.birth_year = calendar[static_cast<std::size_t>(j)].birth_year;
        const double censor_age = calendar[static_cast<std::size_t>(j)].censor_age;
        const auto t = draw_event_time(rng, cure, r);
        if (t && *t <= censor_age) {
            rec.x = *t;
            rec.delta = 1;
            rec.event_year = *rec.birth_year + *t;
        } else {
            rec.x = censor_age;
            rec.delta = 0;
        }
    }
    fam.validate();
    return fam;
}

} // namespace detail

/// Generates the full registry; reproducible from the scenario seed and
/// independent of the thread count.
inline Registry simulate_registry(const Scenario& sc, unsigned n_threads = 0) {
    Registry out;
    out.families.resize(sc.n_families);
    parallel_for(
        sc.n_families,
        [&](std::size_t i) { out.families[i] = detail::simulate_family(sc, i); },
        n_threads);
    out.fh_labels.reserve(sc.n_families);
    for (const auto& f : out.families) out.fh_labels.push_back(fh_indicator(f, 0));
    return out;
}

} // namespace famcure
