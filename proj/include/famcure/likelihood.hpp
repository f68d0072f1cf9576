#pragma once

// Exact observed-data log-likelihoods: the closed-form marginal likelihood of
// the shared-frailty cure-rate model, its univariate reduction, the
// per-subject conditional kernel, and the family-history cure-rate variant.
//
// Everything is evaluated in log space. The frailty-integrated factor is
// computed as -(theta + D) * log1p(-logH / theta) with logH accumulated from
// per-subject log-survivals, so it never forms the underflow-prone product of
// population survivals.

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "famcure/data.hpp"
#include "famcure/parallel.hpp"
#include "famcure/special.hpp"

namespace famcure {

struct FhParamSet {
    double beta;  // family-history risk multiplier
    double p;
    Baseline gamma;

    FhParamSet(double beta_, double p_, Baseline gamma_)
        : beta(beta_), p(p_), gamma(std::move(gamma_)) {
        detail::require(detail::pos(beta), "FhParamSet: beta must be positive");
        detail::require(std::isfinite(p) && p > 0.0 && p < 1.0, "FhParamSet: p must be in (0,1)");
    }
};

/// Log contribution of one observation under fixed frailty r:
/// censored subjects contribute r * log s0(x); events additionally contribute
/// log r + log[(1-p) f(x)] - log s0(x).
inline double conditional_contribution_log(const CureRateParams& c, const SubjectRecord& rec, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("conditional_contribution_log: r must be positive");
    const double ls0 = log_s0(c, rec.x);
    double out = r * ls0;
    if (rec.delta == 1) {
        out += std::log(r) + std::log1p(-c.p) + famcure::log_density(c.baseline, rec.x) - ls0;
    }
    return out;
}

namespace detail {

// Event terms, event count and accumulated log-survival for one family.
struct FamilyTerms {
    double event_sum = 0.0;
    double log_h = 0.0;
    int n_events = 0;
};

inline FamilyTerms family_terms(const CureRateParams& c, const Family& f) {
    FamilyTerms t;
    const double log_one_minus_p = std::log1p(-c.p);
    for (const auto& m : f.members) {
        const double ls0 = log_s0(c, m.x);
        t.log_h += ls0;
        if (m.delta == 1) {
            t.n_events += 1;
            t.event_sum += log_one_minus_p + famcure::log_density(c.baseline, m.x) - ls0;
        }
    }
    return t;
}

inline double family_loglik_impl(double theta, const CureRateParams& c, const Family& f) {
    const FamilyTerms t = family_terms(c, f);
    if (std::isinf(t.event_sum)) return t.event_sum;  // event where the density vanishes
    const double d = static_cast<double>(t.n_events);
    return t.event_sum + std::lgamma(theta + d) - std::lgamma(theta) - d * std::log(theta) -
           (theta + d) * std::log1p(-t.log_h / theta);
}

} // namespace detail

/// Closed-form marginal log-likelihood of one family.
inline double family_loglik(const ParamSet& pi, const Family& f) {
    return detail::family_loglik_impl(pi.theta, pi.cure(), f);
}

/// Sum of family log-likelihoods with compensated, order-fixed reduction.
/// Family terms may be evaluated in parallel; the reduction order never
/// depends on the thread count.
inline double total_loglik(const ParamSet& pi, std::span<const Family> data, unsigned n_threads = 1) {
    if (data.empty()) throw std::invalid_argument("total_loglik: data must be nonempty");
    const CureRateParams c = pi.cure();
    const double theta = pi.theta;
    std::vector<double> terms(data.size());
    parallel_for(
        data.size(),
        [&](std::size_t i) { terms[i] = detail::family_loglik_impl(theta, c, data[i]); },
        n_threads);
    for (double v : terms) {
        if (std::isinf(v) && v < 0.0) return v;
    }
    return compensated_total(terms);
}

/// Univariate reduction: same likelihood restricted to singleton families.
inline double univariate_loglik(const ParamSet& pi, std::span<const Family> data, unsigned n_threads = 1) {
    for (const auto& f : data) {
        if (f.members.size() != 1) {
            throw std::invalid_argument("univariate_loglik: every family must have exactly one member");
        }
    }
    return total_loglik(pi, data, n_threads);
}

/// Univariate family-history cure-rate log-likelihood over main subjects.
/// A subject with history multiplies the survival exponent by beta, which is
/// again a cure-rate model with cure fraction p^beta.
inline double fh_loglik(const FhParamSet& pifh,
                        std::span<const std::pair<SubjectRecord, FhLabel>> data) {
    if (data.empty()) throw std::invalid_argument("fh_loglik: data must be nonempty");
    const CureRateParams c(pifh.p, pifh.gamma);
    const double log_one_minus_p = std::log1p(-pifh.p);
    CompensatedSum sum;
    for (const auto& [rec, label] : data) {
        const double b = label.fh_end == 1 ? pifh.beta : 1.0;
        const double ls0 = log_s0(c, rec.x);
        if (rec.delta == 1) {
            const double lf = famcure::log_density(c.baseline, rec.x);
            if (std::isinf(lf) && lf < 0.0) return lf;
            sum.add(std::log(b) + (b - 1.0) * ls0 + log_one_minus_p + lf);
        } else {
            sum.add(b * ls0);
        }
    }
    return sum.value();
}

/// Observed-data cure-rate log-likelihood ignoring frailty and history
/// (the per-subject kernel at r = 1); the fh model reduces to this at beta = 1.
inline double plain_cr_loglik(double p, const Baseline& gamma, std::span<const SubjectRecord> data) {
    const CureRateParams c(p, gamma);
    CompensatedSum sum;
    for (const auto& rec : data) {
        sum.add(conditional_contribution_log(c, rec, 1.0));
    }
    return sum.value();
}

} // namespace famcure
