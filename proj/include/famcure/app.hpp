#pragma once

// Command-line entry point: subcommand wiring and argument parsing. Kept in
// the library so tests can drive the tool in-process.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "famcure/cli.hpp"
#include "famcure/replicate.hpp"
#include "famcure/validate.hpp"

namespace famcure::cli {

/// Runs the tool on the given arguments (without the program name);
/// returns the process exit code.
inline int run(const std::vector<std::string>& args) {
    CLI::App app{"Shared-frailty cure-rate survival modelling toolkit"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_out;
    std::uint64_t sim_seed = 0;
    unsigned threads = 0;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic family registry");
    sim->add_option("--config", sim_config, "Scenario config file")->required();
    sim->add_option("--seed", sim_seed, "Master seed")->required();
    sim->add_option("--out", sim_out, "Output CSV path")->required();
    sim->add_option("--threads", threads, "Worker threads (0 = auto)");

    // fit
    std::string fit_data, fit_model = "multivariate", fit_baseline = "weibull", fit_opts, fit_out;
    std::uint64_t fit_seed = 0;
    bool fit_no_se = false;
    auto* fit = app.add_subcommand("fit", "Maximum-likelihood estimation");
    fit->add_option("--data", fit_data, "Family CSV")->required();
    fit->add_option("--model", fit_model, "multivariate | univariate | fh");
    fit->add_option("--baseline", fit_baseline, "weibull | gamma | lognormal | gamma3");
    fit->add_option("--opts", fit_opts, "Fit options config file");
    fit->add_option("--seed", fit_seed, "Multistart jitter seed");
    fit->add_option("--out", fit_out, "Fit report path (stdout when omitted)");
    fit->add_option("--threads", threads, "Worker threads (0 = auto)");
    fit->add_flag("--no-se", fit_no_se, "Skip standard errors");

    // predict
    std::string pred_data, pred_fit, pred_cfg, pred_out;
    std::optional<double> pred_alpha, pred_tau;
    auto* pred = app.add_subcommand("predict", "Posterior familial risk per family");
    pred->add_option("--data", pred_data, "Family CSV")->required();
    pred->add_option("--fit", pred_fit, "Fit report with model parameters")->required();
    pred->add_option("--config", pred_cfg, "Config file carrying alpha/tau");
    pred->add_option("--alpha", pred_alpha, "High-risk prior tail probability");
    pred->add_option("--tau", pred_tau, "Classification threshold (default alpha)");
    pred->add_option("--out", pred_out, "Output CSV path")->required();

    // evaluate
    std::string eval_pred, eval_truth, eval_out;
    double eval_alpha = 0.05;
    std::optional<double> eval_theta_true;
    bool eval_half_ties = false, eval_all_pairs = false;
    auto* eval = app.add_subcommand("evaluate", "Prediction-accuracy report");
    eval->add_option("--pred", eval_pred, "Prediction CSV from `predict`")->required();
    eval->add_option("--truth", eval_truth, "Family CSV with true_frailty")->required();
    eval->add_option("--theta-true", eval_theta_true, "Generating theta for binary labels");
    eval->add_option("--alpha", eval_alpha, "High-risk prior tail probability");
    eval->add_flag("--half-ties", eval_half_ties, "Credit tied risks 0.5 in the concordance");
    eval->add_flag("--all-pairs", eval_all_pairs, "Keep within-family pairs (diagnostic)");
    eval->add_option("--out", eval_out, "Report path (stdout when omitted)");

    // validate
    std::size_t val_cases = 200;
    std::uint64_t val_seed = 1;
    auto* val = app.add_subcommand("validate", "Run the oracle cross-check suite");
    val->add_option("--cases", val_cases, "Randomized cases for the likelihood suite");
    val->add_option("--seed", val_seed, "Suite seed");

    // replicate
    study::StudyConfig rep_cfg;
    std::string rep_grid = "small", rep_out;
    std::vector<double> rep_thetas{0.5};
    auto* rep = app.add_subcommand("replicate", "Repeated simulate/fit/predict study");
    rep->add_option("--reps", rep_cfg.reps, "Repetitions per scenario");
    rep->add_option("--n-families", rep_cfg.n_families, "Families per repetition");
    rep->add_option("--grid", rep_grid, "small | full | single");
    rep->add_option("--theta", rep_thetas, "Frailty values")->delimiter(',');
    rep->add_option("--p", rep_cfg.p, "Cure fraction");
    rep->add_option("--baseline", rep_cfg.baseline, "Baseline family");
    rep->add_option("--baseline-params", rep_cfg.baseline_params, "Baseline parameters")->delimiter(',');
    rep->add_option("--alpha", rep_cfg.alpha, "High-risk prior tail probability");
    rep->add_option("--seed", rep_cfg.seed, "Master seed");
    rep->add_option("--starts", rep_cfg.fit.n_starts, "Multistart count per fit");
    rep->add_option("--threads", rep_cfg.threads, "Worker threads (0 = auto)");
    rep->add_option("--out", rep_out, "Machine-readable report path");

    std::vector<std::string> argv_storage = args;
    std::vector<const char*> argv;
    argv.push_back("famcure");
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, sim_seed, sim_out, threads);
        if (fit->parsed()) {
            return cmd_fit(fit_data, fit_model, fit_baseline, fit_opts, fit_seed, fit_out, threads,
                           !fit_no_se, fit->count("--model") > 0, fit->count("--baseline") > 0);
        }
        if (pred->parsed()) {
            return cmd_predict(pred_data, pred_fit, pred_cfg, pred_alpha, pred_tau, pred_out);
        }
        if (eval->parsed()) {
            return cmd_evaluate(eval_pred, eval_truth, eval_theta_true, eval_alpha, eval_half_ties,
                                eval_all_pairs, eval_out);
        }
        if (val->parsed()) {
            const ValidationReport report = run_validation(val_cases, val_seed);
            std::cout << report.render();
            return report.all_pass() ? 0 : 4;
        }
        if (rep->parsed()) {
            std::vector<study::GridPoint> grid;
            if (rep_grid == "small") grid = {{2, 0.8}, {5, 0.8}};
            else if (rep_grid == "full") grid = {{2, 0.8}, {5, 0.8}, {10, 5.0}, {20, 10.0}};
            else if (rep_grid == "single") grid = {{5, 0.8}};
            else throw std::runtime_error("unknown grid: " + rep_grid);
            rep_cfg.seed = resolve_seed(rep_cfg.seed);
            const study::StudyResult result = study::run_study(grid, rep_thetas, rep_cfg);
            std::cout << study::render_tables(result);
            if (!rep_out.empty()) {
                study::machine_doc(result).save(rep_out);
                std::cout << "\nmachine-readable report -> " << rep_out << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace famcure::cli
