#pragma once

// Posterior familial risk under the conjugate Gamma update: the posterior is
// Gamma(theta + events, theta - sum log s0(x)), summarized by mean, median
// and an exceedance score against the prior high-risk quantile.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "famcure/data.hpp"
#include "famcure/special.hpp"

namespace famcure {

struct PosteriorRisk {
    double shape = 0.0;
    double rate = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double high_risk_score = 0.0;  // P(R > prior (1-alpha)-quantile | data)
};

/// Conjugate posterior parameters for one family.
inline std::pair<double, double> posterior_params(const Family& f, const ParamSet& pi) {
    const CureRateParams c = pi.cure();
    double rate = pi.theta;
    for (const auto& m : f.members) rate -= log_s0(c, m.x);
    return {pi.theta + static_cast<double>(event_count(f)), rate};
}

inline double posterior_mean(const Family& f, const ParamSet& pi) {
    const auto [shape, rate] = posterior_params(f, pi);
    return shape / rate;
}

/// Posterior median via the regularized incomplete gamma inverse.
inline double posterior_median(const Family& f, const ParamSet& pi) {
    const auto [shape, rate] = posterior_params(f, pi);
    return gamma_quantile(shape, rate, 0.5);
}

/// Prior quantile defining the high-risk group: the (1-alpha) quantile of
/// Gamma(theta, theta).
inline double prior_high_risk_threshold(double theta, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    return gamma_quantile(theta, theta, 1.0 - alpha);
}

/// Posterior exceedance probability of the prior high-risk threshold; larger
/// means riskier, and a family carrying no information scores exactly alpha.
inline double high_risk_score(const Family& f, const ParamSet& pi, double alpha = 0.05) {
    const double q = prior_high_risk_threshold(pi.theta, alpha);
    const auto [shape, rate] = posterior_params(f, pi);
    return gamma_q(shape, rate * q);
}

/// Binary high-risk call: score strictly above tau.
inline int classify(double score, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("classify: tau must be in (0,1)");
    return score > tau ? 1 : 0;
}

/// Full posterior summary for one family.
inline PosteriorRisk posterior_risk(const Family& f, const ParamSet& pi, double alpha = 0.05) {
    PosteriorRisk out;
    const auto [shape, rate] = posterior_params(f, pi);
    out.shape = shape;
    out.rate = rate;
    out.mean = shape / rate;
    out.median = gamma_quantile(shape, rate, 0.5);
    const double q = prior_high_risk_threshold(pi.theta, alpha);
    out.high_risk_score = gamma_q(shape, rate * q);
    return out;
}

} // namespace famcure
