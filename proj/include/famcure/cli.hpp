#pragma once

// Subcommand implementations behind the command-line tool: simulate, fit,
// predict, evaluate, validate and replicate. Everything is a pure function
// of (inputs, seed); FAMCURE_SEED and FAMCURE_THREADS override the seed and
// thread count.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "famcure/estimate.hpp"
#include "famcure/io.hpp"
#include "famcure/metrics.hpp"
#include "famcure/oracle.hpp"
#include "famcure/predict.hpp"
#include "famcure/simulate.hpp"

namespace famcure::cli {

inline std::uint64_t resolve_seed(std::uint64_t from_args) {
    if (const char* env = std::getenv("FAMCURE_SEED")) {
        return static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
    }
    return from_args;
}

inline Scenario scenario_from_doc(const KeyValueDoc& doc, std::uint64_t seed) {
    const std::string baseline = doc.get_or("baseline", "weibull");
    const ParamSet truth(doc.get_num("theta"), doc.get_num("p"),
                         make_baseline(baseline, doc.get_array("baseline_params")));
    Scenario sc(static_cast<std::size_t>(doc.get_num("n_families")),
                static_cast<int>(doc.get_num("n_f")), doc.get_num("lambda_f"), truth, seed);
    sc.follow_up_end = doc.get_num_or("follow_up_end", sc.follow_up_end);
    sc.mother_birth_lo = doc.get_num_or("mother_birth_lo", sc.mother_birth_lo);
    sc.mother_birth_hi = doc.get_num_or("mother_birth_hi", sc.mother_birth_hi);
    sc.maternal_age_lo = doc.get_num_or("maternal_age_lo", sc.maternal_age_lo);
    sc.maternal_age_hi = doc.get_num_or("maternal_age_hi", sc.maternal_age_hi);
    sc.censoring.enabled = doc.get_or("censoring", "on") != "off";
    sc.censoring.death_log_mean = doc.get_num_or("death_log_mean", sc.censoring.death_log_mean);
    sc.censoring.death_log_sd = doc.get_num_or("death_log_sd", sc.censoring.death_log_sd);
    sc.censoring.death_cap = doc.get_num_or("death_cap", sc.censoring.death_cap);
    sc.censoring.lost_mean = doc.get_num_or("lost_mean", sc.censoring.lost_mean);
    return sc;
}

inline FitOptions fit_options_from_doc(const KeyValueDoc& doc) {
    FitOptions opts;
    opts.max_evals = static_cast<std::size_t>(doc.get_num_or("max_evals", static_cast<double>(opts.max_evals)));
    opts.tol = doc.get_num_or("tol", opts.tol);
    opts.n_starts = static_cast<int>(doc.get_num_or("n_starts", opts.n_starts));
    opts.seed = static_cast<std::uint64_t>(doc.get_num_or("seed", 0.0));
    return opts;
}

inline KeyValueDoc fit_report_doc(const FitResult& fit, const FitOptions& opts) {
    KeyValueDoc doc;
    doc.set("model", model_name(fit.model));
    doc.set("baseline", fit.baseline_name);
    if (fit.params) {
        doc.set_num("theta", fit.params->theta);
        doc.set_num("p", fit.params->p);
        doc.set_array("baseline_params", baseline_params(fit.params->gamma));
    } else if (fit.fh_params) {
        doc.set_num("beta", fit.fh_params->beta);
        doc.set_num("p", fit.fh_params->p);
        doc.set_array("baseline_params", baseline_params(fit.fh_params->gamma));
    }
    doc.set_num("loglik", fit.loglik_at_max);
    doc.set("converged", fit.converged ? "1" : "0");
    doc.set_num("n_evals", static_cast<double>(fit.n_evals));
    doc.set_num("starts_tried", fit.starts_tried);
    if (fit.std_errors) doc.set_array("std_errors", *fit.std_errors);
    if (!fit.diagnostic.empty()) doc.set("diagnostic", fit.diagnostic);
    doc.set_num("opt_max_evals", static_cast<double>(opts.max_evals));
    doc.set_num("opt_tol", opts.tol);
    doc.set_num("opt_n_starts", opts.n_starts);
    doc.set_num("opt_seed", static_cast<double>(opts.seed));
    return doc;
}

inline ParamSet params_from_fit_doc(const KeyValueDoc& doc) {
    return ParamSet(doc.get_num("theta"), doc.get_num("p"),
                    make_baseline(doc.get("baseline"), doc.get_array("baseline_params")));
}

// ---------------------------------------------------------------- simulate

inline int cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out_path,
                        unsigned threads) {
    const KeyValueDoc doc = KeyValueDoc::parse_file(config_path);
    const Scenario sc = scenario_from_doc(doc, resolve_seed(seed));
    const Registry reg = simulate_registry(sc, threads);
    write_families_csv(out_path, reg.families);
    std::cout << "simulated " << reg.families.size() << " families -> " << out_path << "\n";
    return 0;
}

// --------------------------------------------------------------------- fit

inline std::vector<std::pair<SubjectRecord, FhLabel>> fh_data_from_families(
    std::span<const Family> families) {
    std::vector<std::pair<SubjectRecord, FhLabel>> out;
    out.reserve(families.size());
    for (const auto& f : families) {
        const auto idx = f.main_index();
        if (!idx) throw std::runtime_error("family " + f.id + " has no main subject (fh model)");
        out.emplace_back(f.members[*idx], fh_indicator(f, *idx));
    }
    return out;
}

inline std::vector<Family> main_subject_singletons(std::span<const Family> families) {
    std::vector<Family> out;
    out.reserve(families.size());
    for (const auto& f : families) {
        const auto idx = f.main_index();
        if (!idx) throw std::runtime_error("family " + f.id + " has no main subject (univariate model)");
        out.emplace_back(f.id, std::vector<SubjectRecord>{f.members[*idx]}, f.true_frailty);
    }
    return out;
}

inline int cmd_fit(const std::string& data_path, std::string model_str, std::string baseline,
                   const std::string& opts_path, std::uint64_t seed, const std::string& out_path,
                   unsigned threads, bool with_se, bool model_explicit = true,
                   bool baseline_explicit = true) {
    const auto families = read_families_csv_file(data_path);
    FitOptions opts;
    if (!opts_path.empty()) {
        const KeyValueDoc doc = KeyValueDoc::parse_file(opts_path);
        opts = fit_options_from_doc(doc);
        if (!model_explicit && doc.has("model")) model_str = doc.get("model");
        if (!baseline_explicit && doc.has("baseline")) baseline = doc.get("baseline");
    }
    opts.seed = resolve_seed(seed != 0 ? seed : opts.seed);
    opts.n_threads = threads;
    const Model model = model_from_name(model_str);

    FitResult fit;
    if (model == Model::fh) {
        const auto fh_data = fh_data_from_families(families);
        fit = fit_mle_fh(fh_data, baseline, opts);
        if (with_se) {
            const auto info = observed_information_fh(fh_data, fit);
            fit.std_errors = info.std_errors;
        }
    } else {
        std::vector<Family> singles;
        std::span<const Family> data(families);
        if (model == Model::univariate) {
            singles = main_subject_singletons(families);
            data = singles;
        }
        fit = fit_mle(data, model, baseline, opts);
        if (with_se) {
            const auto info = observed_information(data, model, fit, threads);
            fit.std_errors = info.std_errors;
        }
    }
    const KeyValueDoc report = fit_report_doc(fit, opts);
    if (out_path.empty()) {
        std::cout << report.serialize();
    } else {
        report.save(out_path);
        std::cout << "fit " << model_str << "/" << baseline << ": loglik " << format_double(fit.loglik_at_max)
                  << (fit.converged ? " (converged)" : " (not converged)") << " -> " << out_path << "\n";
    }
    return fit.converged ? 0 : 3;
}

// ----------------------------------------------------------------- predict

inline void write_predictions_csv(std::ostream& os, std::span<const Family> families,
                                  const ParamSet& pi, double alpha, double tau) {
    os << "family_id,shape,rate,mean,median,score,class\n";
    for (const auto& f : families) {
        const PosteriorRisk r = posterior_risk(f, pi, alpha);
        os << f.id << "," << format_double(r.shape) << "," << format_double(r.rate) << ","
           << format_double(r.mean) << "," << format_double(r.median) << ","
           << format_double(r.high_risk_score) << "," << classify(r.high_risk_score, tau) << "\n";
    }
}

inline int cmd_predict(const std::string& data_path, const std::string& fit_path,
                       const std::string& config_path, std::optional<double> alpha_flag,
                       std::optional<double> tau_flag, const std::string& out_path) {
    double alpha = 0.05;
    std::optional<double> tau_cfg;
    if (!config_path.empty()) {
        const KeyValueDoc doc = KeyValueDoc::parse_file(config_path);
        alpha = doc.get_num_or("alpha", alpha);
        if (doc.has("tau")) tau_cfg = doc.get_num("tau");
    }
    if (alpha_flag) alpha = *alpha_flag;
    const double tau = tau_flag ? *tau_flag : tau_cfg.value_or(alpha);
    const auto families = read_families_csv_file(data_path);
    const ParamSet pi = params_from_fit_doc(KeyValueDoc::parse_file(fit_path));
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + out_path);
    write_predictions_csv(os, families, pi, alpha, tau);
    std::cout << "predicted " << families.size() << " families -> " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct PredictionRow {
    double mean = 0.0, median = 0.0, score = 0.0;
    int cls = 0;
};

inline std::map<std::string, PredictionRow> read_predictions_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ":1: empty file");
    const auto header = csv::split_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[csv::trim(header[i])] = i;
    for (const char* required : {"family_id", "mean", "median", "score", "class"}) {
        if (!col.count(required)) throw std::runtime_error(path + ":1: missing column " + std::string(required));
    }
    std::map<std::string, PredictionRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() < header.size()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": too few fields");
        }
        PredictionRow r;
        r.mean = std::stod(fields[col["mean"]]);
        r.median = std::stod(fields[col["median"]]);
        r.score = std::stod(fields[col["score"]]);
        r.cls = static_cast<int>(std::stod(fields[col["class"]]));
        rows[csv::trim(fields[col["family_id"]])] = r;
    }
    return rows;
}

struct EvalInputs {
    std::vector<double> true_r, pred_mean, pred_median, scores;
    std::vector<int> pred_class, true_class;
    std::vector<double> subj_pred, subj_x;
    std::vector<int> subj_delta;
    std::vector<std::size_t> subj_family;
    bool have_truth = false, have_labels = false;
};

inline EvalInputs build_eval_inputs(std::span<const Family> truth,
                                    const std::map<std::string, PredictionRow>& pred,
                                    std::optional<double> theta_true, double alpha) {
    EvalInputs in;
    std::optional<double> q;
    if (theta_true) q = prior_high_risk_threshold(*theta_true, alpha);
    std::size_t fam_idx = 0;
    for (const auto& f : truth) {
        const auto it = pred.find(f.id);
        if (it == pred.end()) throw std::runtime_error("no prediction for family " + f.id);
        const PredictionRow& row = it->second;
        if (f.true_frailty) {
            in.have_truth = true;
            in.true_r.push_back(*f.true_frailty);
            in.pred_mean.push_back(row.mean);
            in.pred_median.push_back(row.median);
            in.scores.push_back(row.score);
            in.pred_class.push_back(row.cls);
            if (q) {
                in.have_labels = true;
                in.true_class.push_back(*f.true_frailty > *q ? 1 : 0);
            }
        }
        for (const auto& m : f.members) {
            in.subj_pred.push_back(row.mean);
            in.subj_x.push_back(m.x);
            in.subj_delta.push_back(m.delta);
            in.subj_family.push_back(fam_idx);
        }
        ++fam_idx;
    }
    return in;
}

inline EvalReport evaluate_predictions(const EvalInputs& in, bool half_ties, bool all_pairs) {
    EvalReport rep;
    const auto c = harrell_c(in.subj_pred, in.subj_x, in.subj_delta, in.subj_family, half_ties,
                             !all_pairs);
    rep.harrell_c = c.value;
    rep.n_pairs_compared = c.comparable;
    if (in.have_truth) {
        rep.mspe = mspe(in.true_r, in.pred_mean);
        rep.pearson_rho = pearson(in.true_r, in.pred_mean);
        rep.rank_rho = rank_rho(in.true_r, in.pred_mean);
        rep.r_squared = r_squared(in.true_r, in.pred_mean);
    }
    if (in.have_labels) {
        rep.auc = auc(in.scores, in.true_class);
        const auto pn = ppv_npv(in.pred_class, in.true_class);
        rep.ppv = pn.ppv;
        rep.npv = pn.npv;
    }
    return rep;
}

inline KeyValueDoc eval_report_doc(const EvalReport& rep) {
    KeyValueDoc doc;
    auto put = [&doc](const char* key, const std::optional<double>& v) {
        if (v) doc.set_num(key, *v);
        else doc.set(key, "absent");
    };
    put("mspe", rep.mspe);
    put("pearson_rho", rep.pearson_rho);
    put("rank_rho", rep.rank_rho);
    put("r_squared", rep.r_squared);
    put("harrell_c", rep.harrell_c);
    put("auc", rep.auc);
    put("ppv", rep.ppv);
    put("npv", rep.npv);
    doc.set_num("n_pairs_compared", static_cast<double>(rep.n_pairs_compared));
    return doc;
}

inline int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                        std::optional<double> theta_true, double alpha, bool half_ties,
                        bool all_pairs, const std::string& out_path) {
    const auto truth = read_families_csv_file(truth_path);
    const auto pred = read_predictions_csv(pred_path);
    const EvalInputs in = build_eval_inputs(truth, pred, theta_true, alpha);
    const EvalReport rep = evaluate_predictions(in, half_ties, all_pairs);
    const KeyValueDoc doc = eval_report_doc(rep);
    if (out_path.empty()) {
        std::cout << doc.serialize();
    } else {
        doc.save(out_path);
        std::cout << "evaluation -> " << out_path << "\n";
    }
    return 0;
}

} // namespace famcure::cli
