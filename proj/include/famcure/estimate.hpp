#pragma once

// Maximum-likelihood estimation over unconstrained transformed parameters:
// multistart simplex search followed by a BFGS polish, curvature-based
// standard errors from the observed information, and the parameter
// transforms themselves.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "famcure/likelihood.hpp"
#include "famcure/optim.hpp"
#include "famcure/rng.hpp"

namespace famcure {

enum class Model { multivariate, univariate, fh };

inline const char* model_name(Model m) {
    switch (m) {
        case Model::multivariate: return "multivariate";
        case Model::univariate: return "univariate";
        default: return "fh";
    }
}

inline Model model_from_name(const std::string& s) {
    if (s == "multivariate") return Model::multivariate;
    if (s == "univariate") return Model::univariate;
    if (s == "fh") return Model::fh;
    throw std::invalid_argument("unknown model: " + s);
}

struct FitOptions {
    std::size_t max_evals = 20000;  // per start
    double tol = 1e-8;              // relative loglik stagnation
    int n_starts = 5;
    std::uint64_t seed = 0;
    unsigned n_threads = 1;

    void validate() const {
        if (!(tol > 0.0)) throw std::invalid_argument("FitOptions: tol must be positive");
        if (n_starts < 1) throw std::invalid_argument("FitOptions: n_starts must be >= 1");
    }
};

struct FitResult {
    std::optional<ParamSet> params;       // multivariate / univariate fits
    std::optional<FhParamSet> fh_params;  // fh fits
    Model model = Model::multivariate;
    std::string baseline_name;
    double loglik_at_max = -std::numeric_limits<double>::infinity();
    std::vector<double> transformed_optimum;
    std::optional<std::vector<double>> std_errors;  // natural scale, transform order
    bool converged = false;
    std::size_t n_evals = 0;
    int starts_tried = 0;
    std::string diagnostic;
};

namespace transform {

inline double logit(double p) { return std::log(p) - std::log1p(-p); }
inline double logistic(double v) {
    const double p = 1.0 / (1.0 + std::exp(-v));
    return std::min(std::max(p, 1e-300), 1.0 - 1e-15);
}

/// (log theta, logit p, log of each baseline parameter).
inline std::vector<double> to_unconstrained(const ParamSet& pi) {
    std::vector<double> v{std::log(pi.theta), logit(pi.p)};
    for (double g : baseline_params(pi.gamma)) {
        if (!(g > 0.0)) throw std::invalid_argument("to_unconstrained: baseline parameters must be positive");
        v.push_back(std::log(g));
    }
    return v;
}

inline ParamSet from_unconstrained(std::span<const double> v, const std::string& baseline) {
    std::vector<double> g;
    for (std::size_t i = 2; i < v.size(); ++i) g.push_back(std::exp(v[i]));
    return ParamSet(std::exp(v[0]), logistic(v[1]), make_baseline(baseline, g));
}

inline std::vector<double> to_unconstrained_fh(const FhParamSet& pi) {
    std::vector<double> v{std::log(pi.beta), logit(pi.p)};
    for (double g : baseline_params(pi.gamma)) {
        if (!(g > 0.0)) throw std::invalid_argument("to_unconstrained_fh: baseline parameters must be positive");
        v.push_back(std::log(g));
    }
    return v;
}

inline FhParamSet from_unconstrained_fh(std::span<const double> v, const std::string& baseline) {
    std::vector<double> g;
    for (std::size_t i = 2; i < v.size(); ++i) g.push_back(std::exp(v[i]));
    return FhParamSet(std::exp(v[0]), logistic(v[1]), make_baseline(baseline, g));
}

/// d(natural)/d(transformed) along the diagonal, for the delta method.
inline std::vector<double> jacobian_diag(std::span<const double> v) {
    std::vector<double> j(v.size());
    j[0] = std::exp(v[0]);
    const double p = logistic(v[1]);
    j[1] = p * (1.0 - p);
    for (std::size_t i = 2; i < v.size(); ++i) j[i] = std::exp(v[i]);
    return j;
}

} // namespace transform

namespace detail {

// Moment-flavored starting point: p0 from the no-event share in the oldest
// quartile, baseline scale/shape from event-age log-moments; the first
// coordinate (log theta or log beta) starts at 0.
inline std::vector<double> heuristic_start(std::span<const SubjectRecord> subjects,
                                           const std::string& baseline) {
    std::vector<double> ages;
    std::vector<double> event_ages;
    for (const auto& s : subjects) {
        ages.push_back(s.x);
        if (s.delta == 1) event_ages.push_back(s.x);
    }
    std::sort(ages.begin(), ages.end());
    const double age_cut = ages[ages.size() - std::max<std::size_t>(1, ages.size() / 4)];
    std::size_t old_n = 0, old_censored = 0;
    for (const auto& s : subjects) {
        if (s.x >= age_cut) {
            ++old_n;
            if (s.delta == 0) ++old_censored;
        }
    }
    double p0 = old_n > 0 ? static_cast<double>(old_censored) / static_cast<double>(old_n) : 0.5;
    p0 = std::min(std::max(p0, 0.02), 0.98);

    double lm = std::log(50.0), ls = 0.3;
    double min_event = 1.0;
    if (!event_ages.empty()) {
        min_event = *std::min_element(event_ages.begin(), event_ages.end());
        double s1 = 0.0;
        for (double a : event_ages) s1 += std::log(std::max(a, 1e-9));
        lm = s1 / static_cast<double>(event_ages.size());
        double s2 = 0.0;
        for (double a : event_ages) {
            const double d = std::log(std::max(a, 1e-9)) - lm;
            s2 += d * d;
        }
        ls = event_ages.size() > 1 ? std::sqrt(s2 / static_cast<double>(event_ages.size() - 1)) : 0.3;
        ls = std::max(ls, 0.05);
    }

    std::vector<double> start{0.0, transform::logit(p0)};
    if (baseline == "weibull") {
        const double k0 = std::min(std::max(1.28 / ls, 0.3), 50.0);
        const double lam0 = std::exp(lm + 0.5772 / k0);
        start.push_back(std::log(k0));
        start.push_back(std::log(lam0));
    } else if (baseline == "gamma" || baseline == "gamma3") {
        const double shape0 = std::min(std::max(1.0 / (ls * ls), 0.3), 80.0);
        const double scale0 = std::max(std::exp(lm) / shape0, 1e-6);
        start.push_back(std::log(shape0));
        start.push_back(std::log(scale0));
        if (baseline == "gamma3") start.push_back(std::log(std::max(0.5 * min_event, 1e-3)));
    } else if (baseline == "lognormal") {
        start.push_back(std::log(std::max(std::fabs(lm), 0.1)));
        start.push_back(std::log(ls));
    } else {
        throw std::invalid_argument("heuristic_start: unknown baseline " + baseline);
    }
    return start;
}

struct StartOutcome {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    double grad_max_norm = std::numeric_limits<double>::infinity();
    bool stagnated = false;
    std::size_t n_evals = 0;
    bool flat = false;
};

inline StartOutcome run_one_start(const Objective& nll, std::vector<double> start,
                                  const FitOptions& opts) {
    double seen_min = std::numeric_limits<double>::infinity();
    double seen_max = -std::numeric_limits<double>::infinity();
    const Objective tracked = [&](const std::vector<double>& v) {
        const double f = nll(v);
        if (std::isfinite(f)) {
            seen_min = std::min(seen_min, f);
            seen_max = std::max(seen_max, f);
        }
        return f;
    };
    StartOutcome out;
    auto nm = nelder_mead(tracked, std::move(start), opts.tol, opts.max_evals);
    out.n_evals = nm.n_evals;
    out.stagnated = nm.stagnated;
    auto polish = bfgs_polish(tracked, nm.x);
    out.n_evals += polish.n_evals;
    if (std::isfinite(polish.f) && polish.f <= nm.f) {
        out.x = std::move(polish.x);
        out.f = polish.f;
    } else {
        out.x = std::move(nm.x);
        out.f = nm.f;
    }
    out.grad_max_norm = polish.grad_max_norm;
    out.flat = std::isfinite(seen_max) && (seen_max - seen_min) <= 1e-12 * (1.0 + std::fabs(seen_max));
    return out;
}

inline double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

// Multistart driver; leaves params / fh_params to the caller.
inline FitResult fit_transformed(const Objective& nll, const std::vector<double>& heuristic,
                                 const FitOptions& opts) {
    opts.validate();
    FitResult res;
    Rng rng(opts.seed ^ 0x5bd1e995ULL);
    std::optional<StartOutcome> best;
    bool all_flat = true;
    for (int s = 0; s < opts.n_starts; ++s) {
        std::vector<double> start = heuristic;
        if (s > 0) {
            for (auto& v : start) v += rng.uniform(-0.5, 0.5) * (1.0 + std::fabs(v));
        }
        StartOutcome out = run_one_start(nll, std::move(start), opts);
        res.n_evals += out.n_evals;
        ++res.starts_tried;
        all_flat = all_flat && out.flat;
        if (!best || out.f < best->f ||
            (out.f == best->f && vec_norm(out.x) < vec_norm(best->x))) {
            best = std::move(out);
        }
    }
    if (!best || !std::isfinite(best->f)) {
        throw std::runtime_error("fit_mle: log-likelihood is -inf at every start");
    }
    res.loglik_at_max = -best->f;
    res.transformed_optimum = best->x;
    res.converged = best->stagnated && best->grad_max_norm < 1e-4;
    if (all_flat) {
        res.converged = false;
        res.diagnostic = "flat likelihood: data carry no information";
    }
    return res;
}

// Objective wrapper: any domain error or overflow counts as +inf.
template <typename Fn>
Objective guard(Fn&& fn) {
    return [f = std::forward<Fn>(fn)](const std::vector<double>& v) -> double {
        for (double e : v) {
            if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
        }
        try {
            const double val = f(v);
            return std::isnan(val) ? std::numeric_limits<double>::infinity() : val;
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };
}

} // namespace detail

/// MLE of the multivariate (or univariate-reduced) shared-frailty cure-rate
/// model. The univariate model requires singleton families.
inline FitResult fit_mle(std::span<const Family> data, Model model, const std::string& baseline,
                         const FitOptions& opts = {}) {
    if (data.empty()) throw std::invalid_argument("fit_mle: data must be nonempty");
    if (model == Model::fh) throw std::invalid_argument("fit_mle: fh model needs (record, label) data");
    if (model == Model::univariate) {
        for (const auto& f : data) {
            if (f.members.size() != 1) {
                throw std::invalid_argument("fit_mle: univariate model requires singleton families");
            }
        }
    }
    std::vector<SubjectRecord> subjects;
    for (const auto& f : data) subjects.insert(subjects.end(), f.members.begin(), f.members.end());

    const Objective nll = detail::guard([&data, &baseline, &opts](const std::vector<double>& v) {
        const ParamSet pi = transform::from_unconstrained(v, baseline);
        return -total_loglik(pi, data, opts.n_threads);
    });
    FitResult res = detail::fit_transformed(nll, detail::heuristic_start(subjects, baseline), opts);
    res.model = model;
    res.baseline_name = baseline;
    res.params = transform::from_unconstrained(res.transformed_optimum, baseline);
    return res;
}

/// MLE of the univariate family-history cure-rate model over main subjects.
inline FitResult fit_mle_fh(std::span<const std::pair<SubjectRecord, FhLabel>> data,
                            const std::string& baseline, const FitOptions& opts = {}) {
    if (data.empty()) throw std::invalid_argument("fit_mle_fh: data must be nonempty");
    std::vector<SubjectRecord> subjects;
    subjects.reserve(data.size());
    for (const auto& [rec, label] : data) subjects.push_back(rec);

    const Objective nll = detail::guard([&data, &baseline](const std::vector<double>& v) {
        const FhParamSet pi = transform::from_unconstrained_fh(v, baseline);
        return -fh_loglik(pi, data);
    });
    FitResult res = detail::fit_transformed(nll, detail::heuristic_start(subjects, baseline), opts);
    res.model = Model::fh;
    res.baseline_name = baseline;
    res.fh_params = transform::from_unconstrained_fh(res.transformed_optimum, baseline);
    return res;
}

struct ObservedInformation {
    std::vector<double> matrix;  // negative Hessian of the loglik, row-major,
                                 // transformed coordinates
    std::size_t dim = 0;
    std::optional<std::vector<double>> std_errors;  // natural scale via delta method
};

/// Observed information at a transformed point for an arbitrary loglik;
/// central differences with one Richardson refinement (step 1e-4).
inline ObservedInformation observed_information_at(const Objective& loglik,
                                                   const std::vector<double>& at,
                                                   std::span<const double> jacobian_diag) {
    const Objective neg = [&loglik](const std::vector<double>& v) { return -loglik(v); };
    ObservedInformation out;
    out.dim = at.size();
    out.matrix = numeric_hessian(neg, at, 1e-4);
    // symmetrize to kill finite-difference asymmetry
    for (std::size_t i = 0; i < out.dim; ++i) {
        for (std::size_t j = i + 1; j < out.dim; ++j) {
            const double v = 0.5 * (out.matrix[i * out.dim + j] + out.matrix[j * out.dim + i]);
            out.matrix[i * out.dim + j] = v;
            out.matrix[j * out.dim + i] = v;
        }
    }
    const auto inv = spd_inverse(out.matrix, out.dim);
    if (!inv.empty()) {
        std::vector<double> se(out.dim);
        for (std::size_t i = 0; i < out.dim; ++i) {
            se[i] = std::fabs(jacobian_diag[i]) * std::sqrt(inv[i * out.dim + i]);
        }
        out.std_errors = std::move(se);
    }
    return out;
}

/// Observed information for a fitted model on the given data.
inline ObservedInformation observed_information(std::span<const Family> data, Model model,
                                                const FitResult& fit, unsigned n_threads = 1) {
    if (model == Model::fh) throw std::invalid_argument("observed_information: use the fh overload");
    if (!fit.params) throw std::invalid_argument("observed_information: fit has no parameters");
    const std::string baseline = fit.baseline_name;
    const Objective loglik = [&data, &baseline, n_threads](const std::vector<double>& v) -> double {
        try {
            return total_loglik(transform::from_unconstrained(v, baseline), data, n_threads);
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    return observed_information_at(loglik, fit.transformed_optimum,
                                   transform::jacobian_diag(fit.transformed_optimum));
}

inline ObservedInformation observed_information_fh(
    std::span<const std::pair<SubjectRecord, FhLabel>> data, const FitResult& fit) {
    if (!fit.fh_params) throw std::invalid_argument("observed_information_fh: fit has no fh parameters");
    const std::string baseline = fit.baseline_name;
    const Objective loglik = [&data, &baseline](const std::vector<double>& v) -> double {
        try {
            return fh_loglik(transform::from_unconstrained_fh(v, baseline), data);
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    return observed_information_at(loglik, fit.transformed_optimum,
                                   transform::jacobian_diag(fit.transformed_optimum));
}

} // namespace famcure
