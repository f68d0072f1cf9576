#pragma once

// Repeated simulate -> fit -> predict -> evaluate studies over a grid of
// family-size settings and frailty values, with mean (standard error)
// aggregation into aligned tables and a machine-readable document.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "famcure/cli.hpp"
#include "famcure/estimate.hpp"
#include "famcure/metrics.hpp"
#include "famcure/parallel.hpp"
#include "famcure/predict.hpp"
#include "famcure/simulate.hpp"

namespace famcure::study {

struct GridPoint {
    int n_f;
    double lambda_f;
    [[nodiscard]] std::string label() const {
        char buf[40];
        std::snprintf(buf, sizeof buf, "(%d, %g)", n_f, lambda_f);
        return buf;
    }
};

struct StudyConfig {
    std::size_t n_families = 2000;
    int reps = 10;
    double p = 0.85;
    std::string baseline = "weibull";
    std::vector<double> baseline_params{8.0, 6.0};
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    FitOptions fit;
};

struct RepOutcome {
    double theta_hat = 0.0, p_hat = 0.0;
    std::vector<double> baseline_hat;
    bool converged = false;
    EvalReport by_mean;    // MSPE/rho/rank/R2 against true frailty, plus C/AUC/PPV/NPV
    EvalReport by_median;  // MSPE/rho/rank/R2 using the posterior median
};

/// One simulate -> fit -> predict -> evaluate repetition.
inline RepOutcome run_rep(const GridPoint& g, double theta, const StudyConfig& cfg,
                          std::uint64_t rep_seed) {
    Scenario sc(cfg.n_families, g.n_f, g.lambda_f,
                ParamSet(theta, cfg.p, make_baseline(cfg.baseline, cfg.baseline_params)), rep_seed);
    const Registry reg = simulate_registry(sc, 1);

    FitOptions fopts = cfg.fit;
    fopts.seed = rep_seed ^ 0xabcdef12u;
    const FitResult fit = fit_mle(reg.families, Model::multivariate, cfg.baseline, fopts);

    RepOutcome out;
    out.theta_hat = fit.params->theta;
    out.p_hat = fit.params->p;
    out.baseline_hat = baseline_params(fit.params->gamma);
    out.converged = fit.converged;

    // posterior prediction with the fitted parameters
    const std::size_t n = reg.families.size();
    std::vector<double> true_r(n), mean_r(n), median_r(n), scores(n);
    std::vector<int> cls(n), labels(n);
    std::vector<double> subj_pred, subj_x;
    std::vector<int> subj_delta;
    std::vector<std::size_t> subj_fam;
    const double q_true = prior_high_risk_threshold(theta, cfg.alpha);
    for (std::size_t i = 0; i < n; ++i) {
        const Family& f = reg.families[i];
        const PosteriorRisk r = posterior_risk(f, *fit.params, cfg.alpha);
        true_r[i] = *f.true_frailty;
        mean_r[i] = r.mean;
        median_r[i] = r.median;
        scores[i] = r.high_risk_score;
        cls[i] = classify(r.high_risk_score, cfg.alpha);
        labels[i] = *f.true_frailty > q_true ? 1 : 0;
        for (const auto& m : f.members) {
            subj_pred.push_back(r.mean);
            subj_x.push_back(m.x);
            subj_delta.push_back(m.delta);
            subj_fam.push_back(i);
        }
    }
    out.by_mean.mspe = mspe(true_r, mean_r);
    out.by_mean.pearson_rho = pearson(true_r, mean_r);
    out.by_mean.rank_rho = rank_rho(true_r, mean_r);
    out.by_mean.r_squared = r_squared(true_r, mean_r);
    const auto c = harrell_c(subj_pred, subj_x, subj_delta, subj_fam);
    out.by_mean.harrell_c = c.value;
    out.by_mean.n_pairs_compared = c.comparable;
    out.by_mean.auc = auc(scores, labels);
    const auto pn = ppv_npv(cls, labels);
    out.by_mean.ppv = pn.ppv;
    out.by_mean.npv = pn.npv;

    out.by_median.mspe = mspe(true_r, median_r);
    out.by_median.pearson_rho = pearson(true_r, median_r);
    out.by_median.rank_rho = rank_rho(true_r, median_r);
    out.by_median.r_squared = r_squared(true_r, median_r);
    return out;
}

struct MeanSe {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;
};

inline MeanSe mean_se(std::span<const double> v) {
    MeanSe out;
    out.n = v.size();
    if (v.empty()) return out;
    double s = 0.0;
    for (double e : v) s += e;
    out.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double e : v) ss += (e - out.mean) * (e - out.mean);
        out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    } else {
        out.se = 0.0;
    }
    return out;
}

inline std::string cell(const MeanSe& m) {
    if (m.n == 0 || std::isnan(m.mean)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f (%.3f)", m.mean, m.se);
    return buf;
}

struct ScenarioSummary {
    GridPoint grid;
    double theta_true = 0.0;
    std::vector<RepOutcome> reps;

    [[nodiscard]] MeanSe collect(double RepOutcome::*field) const {
        std::vector<double> v;
        for (const auto& r : reps) v.push_back(r.*field);
        return mean_se(v);
    }
    [[nodiscard]] MeanSe collect_baseline(std::size_t i) const {
        std::vector<double> v;
        for (const auto& r : reps) {
            if (i < r.baseline_hat.size()) v.push_back(r.baseline_hat[i]);
        }
        return mean_se(v);
    }
    [[nodiscard]] MeanSe collect_metric(EvalReport RepOutcome::*rep_field,
                                        std::optional<double> EvalReport::*metric) const {
        std::vector<double> v;
        for (const auto& r : reps) {
            const auto& m = (r.*rep_field).*metric;
            if (m) v.push_back(*m);
        }
        return mean_se(v);
    }
};

/// Runs reps independent repetitions of one scenario; repetition seeds are
/// derived from the master seed, and repetitions may run in parallel with a
/// deterministic aggregation order.
inline ScenarioSummary run_scenario(const GridPoint& g, double theta, const StudyConfig& cfg,
                                    std::size_t scenario_index) {
    ScenarioSummary sum;
    sum.grid = g;
    sum.theta_true = theta;
    sum.reps.resize(static_cast<std::size_t>(cfg.reps));
    parallel_for(
        sum.reps.size(),
        [&](std::size_t rep) {
            std::uint64_t sm = cfg.seed + 1000003ULL * scenario_index;
            const std::uint64_t rep_seed = splitmix64(sm) + 7919ULL * rep + rep;
            sum.reps[rep] = run_rep(g, theta, cfg, rep_seed);
        },
        cfg.threads);
    return sum;
}

struct StudyResult {
    std::vector<ScenarioSummary> scenarios;
    StudyConfig config;
};

inline StudyResult run_study(std::span<const GridPoint> grid, std::span<const double> thetas,
                             const StudyConfig& cfg) {
    StudyResult out;
    out.config = cfg;
    std::size_t idx = 0;
    for (const auto& g : grid) {
        for (double th : thetas) {
            out.scenarios.push_back(run_scenario(g, th, cfg, idx++));
        }
    }
    return out;
}

inline std::string render_tables(const StudyResult& study) {
    std::ostringstream os;
    const auto& cfg = study.config;
    os << "Replication study: " << cfg.reps << " repetitions, " << cfg.n_families
       << " families each, baseline " << cfg.baseline << ", p = " << cfg.p << "\n\n";

    os << "Parameter recovery, mean (se of mean)\n";
    char head[160];
    std::snprintf(head, sizeof head, "%-12s %-8s %-16s %-16s %-16s %-16s %-16s\n", "(n_F,l_F)",
                  "theta", "theta_hat", "p_hat", "param1_hat", "param2_hat", "param3_hat");
    os << head;
    for (const auto& s : study.scenarios) {
        char row[240];
        std::snprintf(row, sizeof row, "%-12s %-8g %-16s %-16s %-16s %-16s %-16s\n",
                      s.grid.label().c_str(), s.theta_true,
                      cell(s.collect(&RepOutcome::theta_hat)).c_str(),
                      cell(s.collect(&RepOutcome::p_hat)).c_str(),
                      cell(s.collect_baseline(0)).c_str(), cell(s.collect_baseline(1)).c_str(),
                      cell(s.collect_baseline(2)).c_str());
        os << row;
    }

    os << "\nPrediction accuracy of the posterior mean / median, mean (se of mean)\n";
    std::snprintf(head, sizeof head, "%-12s %-8s %-10s %-16s %-16s %-16s %-16s\n", "(n_F,l_F)",
                  "theta", "summary", "MSPE", "rho", "rank_rho", "R2");
    os << head;
    for (const auto& s : study.scenarios) {
        for (const bool median : {false, true}) {
            const auto field = median ? &RepOutcome::by_median : &RepOutcome::by_mean;
            char row[240];
            std::snprintf(row, sizeof row, "%-12s %-8g %-10s %-16s %-16s %-16s %-16s\n",
                          s.grid.label().c_str(), s.theta_true, median ? "median" : "mean",
                          cell(s.collect_metric(field, &EvalReport::mspe)).c_str(),
                          cell(s.collect_metric(field, &EvalReport::pearson_rho)).c_str(),
                          cell(s.collect_metric(field, &EvalReport::rank_rho)).c_str(),
                          cell(s.collect_metric(field, &EvalReport::r_squared)).c_str());
            os << row;
        }
    }

    os << "\nConcordance and binary classification (posterior mean), mean (se of mean)\n";
    std::snprintf(head, sizeof head, "%-12s %-8s %-16s %-16s %-16s %-16s\n", "(n_F,l_F)", "theta",
                  "C", "AUC", "PPV", "NPV");
    os << head;
    for (const auto& s : study.scenarios) {
        char row[240];
        std::snprintf(row, sizeof row, "%-12s %-8g %-16s %-16s %-16s %-16s\n",
                      s.grid.label().c_str(), s.theta_true,
                      cell(s.collect_metric(&RepOutcome::by_mean, &EvalReport::harrell_c)).c_str(),
                      cell(s.collect_metric(&RepOutcome::by_mean, &EvalReport::auc)).c_str(),
                      cell(s.collect_metric(&RepOutcome::by_mean, &EvalReport::ppv)).c_str(),
                      cell(s.collect_metric(&RepOutcome::by_mean, &EvalReport::npv)).c_str());
        os << row;
    }
    return os.str();
}

inline KeyValueDoc machine_doc(const StudyResult& study) {
    KeyValueDoc doc;
    doc.set_num("reps", study.config.reps);
    doc.set_num("n_families", static_cast<double>(study.config.n_families));
    doc.set("baseline", study.config.baseline);
    doc.set_num("p", study.config.p);
    doc.set_num("seed", static_cast<double>(study.config.seed));
    std::size_t i = 0;
    for (const auto& s : study.scenarios) {
        const std::string prefix = "scenario" + std::to_string(i++) + ".";
        doc.set(prefix + "grid", s.grid.label());
        doc.set_num(prefix + "theta_true", s.theta_true);
        auto put = [&](const std::string& key, const MeanSe& m) {
            doc.set_array(prefix + key, std::vector<double>{m.mean, m.se});
        };
        put("theta_hat", s.collect(&RepOutcome::theta_hat));
        put("p_hat", s.collect(&RepOutcome::p_hat));
        for (std::size_t b = 0; b < study.config.baseline_params.size(); ++b) {
            put("baseline_hat" + std::to_string(b), s.collect_baseline(b));
        }
        put("mspe_mean", s.collect_metric(&RepOutcome::by_mean, &EvalReport::mspe));
        put("rho_mean", s.collect_metric(&RepOutcome::by_mean, &EvalReport::pearson_rho));
        put("rank_rho_mean", s.collect_metric(&RepOutcome::by_mean, &EvalReport::rank_rho));
        put("r2_mean", s.collect_metric(&RepOutcome::by_mean, &EvalReport::r_squared));
        put("mspe_median", s.collect_metric(&RepOutcome::by_median, &EvalReport::mspe));
        put("rho_median", s.collect_metric(&RepOutcome::by_median, &EvalReport::pearson_rho));
        put("harrell_c", s.collect_metric(&RepOutcome::by_mean, &EvalReport::harrell_c));
        put("auc", s.collect_metric(&RepOutcome::by_mean, &EvalReport::auc));
        put("ppv", s.collect_metric(&RepOutcome::by_mean, &EvalReport::ppv));
        put("npv", s.collect_metric(&RepOutcome::by_mean, &EvalReport::npv));
    }
    return doc;
}

} // namespace famcure::study
