#pragma once

// Randomized oracle suite: closed-form likelihood vs quadrature, conjugate
// posterior vs Bayes-numerator quadrature, fast metrics vs brute-force
// enumeration, and a trapezoid backstop for the quadrature itself.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "famcure/metrics.hpp"
#include "famcure/oracle.hpp"
#include "famcure/predict.hpp"
#include "famcure/rng.hpp"

namespace famcure {

/// Random parameter set over the ranges exercised by the oracle suite:
/// theta in [0.1, 10], p in [0.5, 0.99], baseline cycling through families.
inline ParamSet random_param_set(Rng& rng) {
    const double theta = rng.uniform(0.1, 10.0);
    const double p = rng.uniform(0.5, 0.99);
    Baseline b = Weibull(1.0, 1.0);
    switch (rng.next_u64() % 4) {
        case 0: b = Weibull(rng.uniform(0.8, 10.0), rng.uniform(2.0, 50.0)); break;
        case 1: b = GammaDist(rng.uniform(0.8, 10.0), rng.uniform(1.0, 12.0)); break;
        case 2: b = Lognormal(rng.uniform(1.0, 4.0), rng.uniform(0.2, 1.5)); break;
        default: b = ThreeParamGamma(rng.uniform(0.8, 8.0), rng.uniform(1.0, 10.0), rng.uniform(0.5, 20.0));
    }
    return ParamSet(theta, p, b);
}

/// Random family with observation times spread over the baseline's range.
inline Family random_family(Rng& rng, const ParamSet& pi, int max_members = 8) {
    const int n = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_members));
    std::vector<SubjectRecord> members;
    members.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double u = rng.uniform(0.02, 0.98);
        const double x = quantile_survival(pi.gamma, u);
        const int delta = rng.uniform() < 0.4 ? 1 : 0;
        members.emplace_back(x, delta, j == 0 ? Role::main : Role::sister);
    }
    return Family("r", std::move(members));
}

struct SuiteResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;      // worst observed discrepancy
    double tolerance = 0.0;
    std::size_t cases = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<SuiteResult> suites;
    [[nodiscard]] bool all_pass() const {
        for (const auto& s : suites) {
            if (!s.pass) return false;
        }
        return true;
    }
    [[nodiscard]] std::string render() const {
        std::ostringstream os;
        for (const auto& s : suites) {
            os << (s.pass ? "PASS" : "FAIL") << "  " << s.name << "  worst=" << s.worst
               << "  tol=" << s.tolerance << "  cases=" << s.cases;
            if (!s.detail.empty()) os << "  (" << s.detail << ")";
            os << "\n";
        }
        return os.str();
    }
};

inline SuiteResult validate_likelihood_oracle(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    SuiteResult res{"likelihood vs quadrature", true, 0.0, 1e-8, cases, ""};
    for (std::size_t i = 0; i < cases; ++i) {
        const ParamSet pi = random_param_set(rng);
        const Family f = random_family(rng, pi);
        const double closed = family_loglik(pi, f);
        const double quad = oracle::quad_marginal_loglik(pi, f);
        const double rel = std::fabs(closed - quad) / (1.0 + std::fabs(quad));
        res.worst = std::max(res.worst, rel);
    }
    res.pass = res.worst < res.tolerance;
    return res;
}

inline SuiteResult validate_conjugacy(std::size_t cases, std::uint64_t seed, std::size_t grid_points = 50) {
    Rng rng(seed);
    SuiteResult res{"conjugate posterior vs quadrature", true, 0.0, 1e-8, cases, ""};
    for (std::size_t i = 0; i < cases; ++i) {
        const ParamSet pi = random_param_set(rng);
        const Family f = random_family(rng, pi);
        const auto [shape, rate] = posterior_params(f, pi);
        std::vector<double> grid(grid_points);
        for (std::size_t k = 0; k < grid_points; ++k) {
            const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(grid_points);
            grid[k] = gamma_quantile(shape, rate, 0.001 + 0.998 * q);
        }
        const auto quad = oracle::quad_posterior_density(pi, f, grid);
        for (std::size_t k = 0; k < grid_points; ++k) {
            const double closed = std::exp(shape * std::log(rate) - std::lgamma(shape) +
                                           (shape - 1.0) * std::log(grid[k]) - rate * grid[k]);
            const double err = std::fabs(closed - quad[k]) / (1.0 + std::fabs(closed));
            res.worst = std::max(res.worst, err);
        }
    }
    res.pass = res.worst < res.tolerance;
    return res;
}

inline SuiteResult validate_metric_oracles(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    SuiteResult res{"metrics vs brute enumeration", true, 0.0, 0.0, cases, "exact agreement required"};
    for (std::size_t i = 0; i < cases; ++i) {
        const std::size_t n = 2 + rng.next_u64() % 199;
        std::vector<double> pred(n), x(n);
        std::vector<int> delta(n), labels(n), pred_class(n);
        std::vector<std::size_t> fam(n);
        const bool tie_heavy = (rng.next_u64() % 3) == 0;
        for (std::size_t k = 0; k < n; ++k) {
            pred[k] = tie_heavy ? static_cast<double>(rng.next_u64() % 5) : rng.uniform(0.0, 4.0);
            x[k] = tie_heavy ? static_cast<double>(rng.next_u64() % 8) : rng.uniform(0.0, 90.0);
            delta[k] = rng.uniform() < 0.4 ? 1 : 0;
            labels[k] = rng.uniform() < 0.3 ? 1 : 0;
            pred_class[k] = rng.uniform() < 0.3 ? 1 : 0;
            fam[k] = rng.next_u64() % std::max<std::size_t>(n / 3, 1);
        }
        for (const bool half : {false, true}) {
            const auto fast = harrell_c(pred, x, delta, fam, half);
            const auto brute = oracle::brute_pairs_c(pred, x, delta, fam, half);
            const bool same = fast.comparable == brute.comparable &&
                              fast.value.has_value() == brute.value.has_value() &&
                              (!fast.value || *fast.value == *brute.value);
            if (!same) {
                res.pass = false;
                res.worst = 1.0;
            }
        }
        const auto fast_auc = auc(pred, labels);
        const auto brute_auc = oracle::brute_auc(pred, labels);
        if (fast_auc.has_value() != brute_auc.has_value() ||
            (fast_auc && *fast_auc != *brute_auc)) {
            res.pass = false;
            res.worst = 1.0;
        }
        const auto pn = ppv_npv(pred_class, labels);
        const auto tally = oracle::brute_tally(pred_class, labels);
        const std::optional<double> bppv =
            tally.tp + tally.fp > 0
                ? std::optional<double>(static_cast<double>(tally.tp) / static_cast<double>(tally.tp + tally.fp))
                : std::nullopt;
        const std::optional<double> bnpv =
            tally.tn + tally.fn > 0
                ? std::optional<double>(static_cast<double>(tally.tn) / static_cast<double>(tally.tn + tally.fn))
                : std::nullopt;
        if (pn.ppv != bppv || pn.npv != bnpv) {
            res.pass = false;
            res.worst = 1.0;
        }
    }
    return res;
}

inline SuiteResult validate_trapezoid_backstop(std::uint64_t seed) {
    Rng rng(seed);
    SuiteResult res{"quadrature vs trapezoid backstop", true, 0.0, 1e-6, 1, ""};
    const ParamSet pi(2.5, 0.85, Weibull(8.0, 6.0));
    Family f("spot", {SubjectRecord(5.2, 1, Role::main), SubjectRecord(6.5, 0), SubjectRecord(3.9, 1)});
    (void)rng;
    const double quad = oracle::quad_marginal_loglik(pi, f);
    const double trap = oracle::trapezoid_marginal_loglik(pi, f, 50.0, 1'000'000);
    res.worst = std::fabs(quad - trap) / (1.0 + std::fabs(quad));
    res.pass = res.worst < res.tolerance;
    return res;
}

/// Runs the full oracle suite.
inline ValidationReport run_validation(std::size_t cases, std::uint64_t seed) {
    ValidationReport rep;
    rep.suites.push_back(validate_likelihood_oracle(cases, seed));
    rep.suites.push_back(validate_conjugacy(std::max<std::size_t>(cases / 5, 20), seed + 1));
    rep.suites.push_back(validate_metric_oracles(std::max<std::size_t>(cases / 5, 20), seed + 2));
    rep.suites.push_back(validate_trapezoid_backstop(seed + 3));
    return rep;
}

} // namespace famcure
