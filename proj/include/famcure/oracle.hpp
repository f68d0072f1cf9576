#pragma once

// Independent numerical ground truth backing the closed forms: the marginal
// family likelihood by Gauss-Laguerre integration of the conditional kernel
// against the frailty prior, the posterior density by Bayes numerator over
// that normalizer, and definitionally direct metric enumerations.
//
// Single-threaded by contract; bit-reproducible for fixed inputs.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "famcure/likelihood.hpp"
#include "famcure/quadrature.hpp"

namespace famcure::oracle {

namespace detail {

// Log of the quadrature estimate of  integral exp(sum_j cc(x_j; r)) g(r) dr
// with n nodes. The variable is rescaled by `scale` (exact for any positive
// value) so the integrand's exponential decay matches the rule's weight; the
// default below uses the decay rate read off the accumulated log-survival.
inline double marginal_quad_once(const ParamSet& pi, const Family& f, int n, double scale) {
    const CureRateParams c = pi.cure();
    const double theta = pi.theta;
    const QuadratureRule rule = gauss_laguerre(n, theta - 1.0);
    const double shift = theta * std::log(theta) - std::lgamma(theta) - theta * std::log(scale);
    std::vector<double> terms;
    terms.reserve(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        if (std::isinf(rule.log_weights[k])) continue;
        const double s = rule.nodes[k];
        const double r = s / scale;
        double cc = 0.0;
        for (const auto& m : f.members) cc += conditional_contribution_log(c, m, r);
        terms.push_back(rule.log_weights[k] + cc + shift + s * (1.0 - theta / scale));
    }
    return log_sum_exp(terms);
}

inline double integrand_scale(const ParamSet& pi, const Family& f) {
    const CureRateParams c = pi.cure();
    double log_h = 0.0;
    for (const auto& m : f.members) log_h += log_s0(c, m.x);
    return pi.theta - log_h;
}

} // namespace detail

/// Marginal family log-likelihood by adaptive Gauss-Laguerre quadrature:
/// node count doubles from 128 until successive estimates agree to 1e-10
/// relative; past 1024 nodes the refinement fails loudly.
inline double quad_marginal_loglik(const ParamSet& pi, const Family& f) {
    const double scale = detail::integrand_scale(pi, f);
    double prev = detail::marginal_quad_once(pi, f, 128, scale);
    for (int n = 256; n <= 1024; n *= 2) {
        const double cur = detail::marginal_quad_once(pi, f, n, scale);
        if (std::fabs(cur - prev) <= 1e-10 * (1.0 + std::fabs(cur))) return cur;
        prev = cur;
    }
    throw std::runtime_error("quad_marginal_loglik: no convergence past 1024 nodes");
}

/// Posterior frailty density on a positive grid, as Bayes numerator over the
/// quadrature normalizer.
inline std::vector<double> quad_posterior_density(const ParamSet& pi, const Family& f,
                                                  std::span<const double> r_grid) {
    const CureRateParams c = pi.cure();
    const FrailtyPrior prior(pi.theta);
    const double log_norm = quad_marginal_loglik(pi, f);
    std::vector<double> out;
    out.reserve(r_grid.size());
    for (double r : r_grid) {
        if (!(r > 0.0)) throw std::invalid_argument("quad_posterior_density: grid must be positive");
        double cc = 0.0;
        for (const auto& m : f.members) cc += conditional_contribution_log(c, m, r);
        out.push_back(std::exp(cc + prior.log_density(r) - log_norm));
    }
    return out;
}

/// Naive trapezoid integration of the same integrand on (0, r_max]; a slow
/// second integrator used to spot-check the quadrature path.
inline double trapezoid_marginal_loglik(const ParamSet& pi, const Family& f, double r_max,
                                        std::size_t n_points) {
    const CureRateParams c = pi.cure();
    const FrailtyPrior prior(pi.theta);
    const double h = r_max / static_cast<double>(n_points);
    std::vector<double> logv(n_points + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i <= n_points; ++i) {
        const double r = h * static_cast<double>(i);
        double cc = 0.0;
        for (const auto& m : f.members) cc += conditional_contribution_log(c, m, r);
        logv[i] = cc + prior.log_density(r);
    }
    // trapezoid: h * (sum of interior + half endpoints), assembled in log space
    std::vector<double> terms;
    terms.reserve(n_points + 1);
    terms.push_back(logv[0] - std::log(2.0));
    for (std::size_t i = 1; i < n_points; ++i) terms.push_back(logv[i]);
    terms.push_back(logv[n_points] - std::log(2.0));
    return std::log(h) + log_sum_exp(terms);
}

struct PairCount {
    std::optional<double> value;
    std::size_t comparable = 0;
};

/// Direct ordered-pair enumeration of the concordance ratio: pairs (a, b)
/// from different families with x_a > x_b and delta_b = 1 are comparable;
/// the numerator counts r_a < r_b (plus half-credit ties when requested).
inline PairCount brute_pairs_c(std::span<const double> pred, std::span<const double> x,
                               std::span<const int> delta, std::span<const std::size_t> family_of,
                               bool half_ties = false) {
    const std::size_t n = pred.size();
    if (x.size() != n || delta.size() != n || family_of.size() != n) {
        throw std::invalid_argument("brute_pairs_c: length mismatch");
    }
    double num = 0.0;
    std::size_t den = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b || family_of[a] == family_of[b]) continue;
            if (!(x[a] > x[b]) || delta[b] != 1) continue;
            ++den;
            if (pred[a] < pred[b]) num += 1.0;
            else if (half_ties && pred[a] == pred[b]) num += 0.5;
        }
    }
    PairCount out;
    out.comparable = den;
    if (den > 0) out.value = num / static_cast<double>(den);
    return out;
}

/// Direct pairwise Mann-Whitney AUC with half-credit for tied scores.
inline std::optional<double> brute_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("brute_auc: length mismatch");
    double num = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) num += 1.0;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    }
    if (pairs == 0) return std::nullopt;
    return num / static_cast<double>(pairs);
}

struct Tally {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Direct 2x2 confusion tally.
inline Tally brute_tally(std::span<const int> pred_class, std::span<const int> true_class) {
    if (pred_class.size() != true_class.size()) throw std::invalid_argument("brute_tally: length mismatch");
    Tally t;
    for (std::size_t i = 0; i < pred_class.size(); ++i) {
        if (pred_class[i] == 1) {
            (true_class[i] == 1 ? t.tp : t.fp) += 1;
        } else {
            (true_class[i] == 0 ? t.tn : t.fn) += 1;
        }
    }
    return t;
}

} // namespace famcure::oracle
