#pragma once

// Cure-rate and Lehmann cure-rate structure on top of a proper baseline:
// population survival s0, its frailty power family, the conditional cure
// fraction, susceptible-conditional laws, the baseline hazard, and the
// marginal non-susceptible fraction under the Gamma frailty prior.

#include <cmath>
#include <stdexcept>

#include "famcure/baseline.hpp"

namespace famcure {

struct CureRateParams {
    double p;  // P(T = +inf) for a unit-frailty subject
    Baseline baseline;

    CureRateParams(double p_, Baseline baseline_) : p(p_), baseline(std::move(baseline_)) {
        detail::require(std::isfinite(p) && p > 0.0 && p < 1.0, "CureRateParams: p must be in (0,1)");
    }
};

// Gamma(theta, theta) frailty: mean 1, variance 1/theta.
struct FrailtyPrior {
    double theta;
    explicit FrailtyPrior(double theta_) : theta(theta_) {
        detail::require(detail::pos(theta), "FrailtyPrior: theta must be positive");
    }
    [[nodiscard]] double mean() const { return 1.0; }
    [[nodiscard]] double variance() const { return 1.0 / theta; }
    [[nodiscard]] double log_density(double r) const {
        if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
        return theta * std::log(theta) - std::lgamma(theta) + (theta - 1.0) * std::log(r) - theta * r;
    }
};

/// Population survival s0(t) = p + (1-p) * baseline survival.
inline double s0(const CureRateParams& c, double t) {
    return c.p + (1.0 - c.p) * survival(c.baseline, t);
}

inline double log_s0(const CureRateParams& c, double t) { return std::log(s0(c, t)); }

/// Conditional survival given frailty r: s0(t)^r.
inline double lehmann_survival(const CureRateParams& c, double t, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("lehmann_survival: r must be positive");
    return std::exp(r * log_s0(c, t));
}

/// Cure fraction of the r-conditional model: p^r.
inline double conditional_cure(const CureRateParams& c, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("conditional_cure: r must be positive");
    return std::exp(r * std::log(c.p));
}

/// Proper survival of susceptibles under frailty r:
/// (s0(t)^r - p^r) / (1 - p^r), written as a ratio of expm1 terms so the
/// numerator keeps full precision deep in the cure plateau where
/// s0(t)^r - p^r cancels.
inline double susceptible_survival_r(const CureRateParams& c, double t, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("susceptible_survival_r: r must be positive");
    const double stilde = survival(c.baseline, t);
    // s0^r - p^r = p^r * expm1(r * log1p((1-p) stilde / p)); the expm1 form
    // is needed only where the difference cancels (small exponent gap), and
    // the direct difference avoids exp's under/overflow where it does not
    const double r_log_p = r * std::log(c.p);
    const double rl = r * std::log1p((1.0 - c.p) * stilde / c.p);
    const double num = rl < 1.0 ? std::exp(r_log_p) * std::expm1(rl)
                                : std::exp(r_log_p + rl) - std::exp(r_log_p);
    const double den = -std::expm1(r_log_p);
    return std::max(0.0, num / den);
}

/// Proper density of susceptibles under frailty r:
/// (1-p)/(1-p^r) * r * s0(t)^(r-1) * baseline density.
inline double susceptible_density_r(const CureRateParams& c, double t, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("susceptible_density_r: r must be positive");
    const double one_minus_pr = -std::expm1(r * std::log(c.p));
    const double log_scale = std::log1p(-c.p) - std::log(one_minus_pr) + std::log(r) +
                             (r - 1.0) * log_s0(c, t);
    return std::exp(log_scale + famcure::log_density(c.baseline, t));
}

/// Baseline hazard (1-p) f(t) / s0(t), evaluated in log space so the deep
/// tail degrades to 0 rather than 0/0.
inline double hazard0(const CureRateParams& c, double t) {
    const double lf = famcure::log_density(c.baseline, t);
    if (std::isinf(lf) && lf < 0.0) return 0.0;
    return std::exp(std::log1p(-c.p) + lf - log_s0(c, t));
}

/// Marginal non-susceptible fraction E[p^R] = (theta / (theta - log p))^theta.
inline double marginal_cure(double theta, double p) {
    if (!(theta > 0.0)) throw std::invalid_argument("marginal_cure: theta must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("marginal_cure: p must be in (0,1)");
    return std::exp(-theta * std::log1p(-std::log(p) / theta));
}

} // namespace famcure
