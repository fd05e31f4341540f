#include "rcmdp/errors.hpp"
#include "rcmdp/experiment.hpp"
#include "rcmdp/instances.hpp"
#include "rcmdp/io.hpp"
#include "rcmdp/mdp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using rcmdp::numvec;

numvec parse_radius_list(const std::string& text) {
    numvec out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw rcmdp::ConfigError("bad radius value '" + item + "'");
        }
    }
    if (out.empty()) throw rcmdp::ConfigError("radius list must be nonempty");
    return out;
}

void print_error_record(const std::string& kind, const std::string& message,
                        const std::string& out_dir) {
    nlohmann::ordered_json record;
    record["error"] = kind;
    record["message"] = message;
    std::cerr << record.dump() << "\n";
    if (!out_dir.empty()) {
        try {
            rcmdp::atomic_write(out_dir + "/error.json", record.dump(2) + "\n");
        } catch (...) {
            // stderr already carries the record
        }
    }
}

struct GenerateOptions {
    std::string kind = "random-garnet";
    std::string out = "instance.json";
    std::uint64_t seed = 0;
    int states = 3, actions = 2, branching = 2, n_constraints = 1;
    int grid_n = 3, hazards = 1;
    double slip = 0.1, threshold = 0.25;
    numvec thresholds;
};

int cmd_generate(const GenerateOptions& opt) {
    rcmdp::TabularRcmdp mdp;
    if (opt.kind == "random-garnet") {
        rcmdp::GarnetParams params;
        params.n_states = opt.states;
        params.n_actions = opt.actions;
        params.branching = opt.branching;
        params.n_constraints = opt.n_constraints;
        params.thresholds = opt.thresholds;
        mdp = rcmdp::make_garnet(params, opt.seed);
    } else if (opt.kind == "gridworld") {
        rcmdp::GridworldParams params;
        params.n = opt.grid_n;
        params.slip = opt.slip;
        params.hazard_count = opt.hazards;
        params.threshold = opt.threshold;
        mdp = rcmdp::make_gridworld(params, opt.seed);
    } else {
        throw rcmdp::ConfigError("unknown generator kind '" + opt.kind + "'");
    }
    rcmdp::save_instance(mdp, opt.out);
    std::cout << "wrote " << opt.out << " (" << mdp.n_states << " states, "
              << mdp.n_actions << " actions, " << mdp.constraint_count()
              << " constraints)\n";
    return 0;
}

int cmd_validate(const std::string& instance_path) {
    const rcmdp::TabularRcmdp mdp = rcmdp::load_instance(instance_path);
    const rcmdp::ValidationReport report = rcmdp::validate(mdp);
    if (!report.structural_ok) {
        std::cout << "structural: FAIL\n";
        for (const auto& v : report.structural_violations) std::cout << "  " << v << "\n";
        return 2;
    }
    std::cout << "structural: ok\n";
    for (const auto& check : report.policy_checks)
        std::cout << "  " << check.policy << ": "
                  << (check.irreducible ? "irreducible" : "REDUCIBLE") << ", "
                  << (check.aperiodic ? "aperiodic" : "PERIODIC") << "\n";
    if (report.ergodicity_warnings.empty()) {
        std::cout << "ergodicity probe: ok (" << report.policy_checks.size()
                  << " policies tested)\n";
    } else {
        for (const auto& w : report.ergodicity_warnings)
            std::cout << "warning: " << w << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular solver and experiment harness for robust constrained "
                 "average-cost MDPs"};
    app.require_subcommand(1);

    // generate
    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Write a random instance file");
    generate->add_option("--kind", gen.kind, "random-garnet | gridworld");
    generate->add_option("--out", gen.out, "Output instance path");
    generate->add_option("--seed", gen.seed, "Generator seed");
    generate->add_option("--states", gen.states, "Garnet state count");
    generate->add_option("--actions", gen.actions, "Garnet action count");
    generate->add_option("--branching", gen.branching, "Garnet support size per row");
    generate->add_option("--constraints", gen.n_constraints, "Garnet constraint count");
    generate->add_option("--thresholds", gen.thresholds, "Garnet constraint thresholds");
    generate->add_option("--n", gen.grid_n, "Gridworld side length");
    generate->add_option("--slip", gen.slip, "Gridworld slip probability");
    generate->add_option("--hazards", gen.hazards, "Gridworld hazard cell count");
    generate->add_option("--threshold", gen.threshold, "Gridworld hazard threshold");

    // run
    std::string run_config;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::string> run_out;
    std::optional<std::string> run_radius;
    bool run_exact_oracle = false, run_quiet = false;
    auto* run_cmd = app.add_subcommand("run", "Execute an experiment config");
    run_cmd->add_option("--config", run_config, "Experiment config path")->required();
    run_cmd->add_option("--seed", run_seed, "Root seed override");
    run_cmd->add_option("--out", run_out, "Output directory override");
    run_cmd->add_option("--radius", run_radius, "Comma-separated radius list override");
    run_cmd->add_flag("--exact-oracle", run_exact_oracle,
                      "Record exact F per iterate and oracle summaries");
    run_cmd->add_flag("--quiet", run_quiet, "Suppress progress output");

    // eval
    std::string eval_policy_path, eval_instance_path, eval_mode = "oracle";
    std::string eval_model = "contamination", eval_metric = "line";
    double eval_radius = 0.1, eval_order = 1.0;
    double eval_epsilon = 0.05, eval_zeta = 0.0;
    std::optional<double> eval_lambda;
    std::uint64_t eval_seed = 0;
    long eval_value_iters = 20000, eval_gain_iters = 2000;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy file");
    eval_cmd->add_option("--policy", eval_policy_path, "Policy path")->required();
    eval_cmd->add_option("--instance", eval_instance_path, "Instance path")->required();
    eval_cmd->add_option("--model", eval_model,
                         "contamination | total-variation | wasserstein");
    eval_cmd->add_option("--radius", eval_radius, "Set radius");
    eval_cmd->add_option("--order", eval_order, "Wasserstein order");
    eval_cmd->add_option("--metric", eval_metric, "line | discrete");
    eval_cmd->add_option("--mode", eval_mode, "oracle | critic");
    eval_cmd->add_option("--lambda", eval_lambda, "Trade-off weight (default auto)");
    eval_cmd->add_option("--epsilon", eval_epsilon, "Accuracy for the auto lambda rule");
    eval_cmd->add_option("--zeta", eval_zeta, "Slackness");
    eval_cmd->add_option("--seed", eval_seed, "Critic-mode seed");
    eval_cmd->add_option("--value-iters", eval_value_iters, "Critic value iterations");
    eval_cmd->add_option("--gain-iters", eval_gain_iters, "Critic gain iterations");

    // validate
    std::string validate_instance;
    auto* validate_cmd = app.add_subcommand("validate", "Check an instance file");
    validate_cmd->add_option("--instance", validate_instance, "Instance path")
        ->required();

    CLI11_PARSE(app, argc, argv);

    std::string out_dir_for_errors;
    try {
        if (generate->parsed()) return cmd_generate(gen);

        if (validate_cmd->parsed()) return cmd_validate(validate_instance);

        if (run_cmd->parsed()) {
            rcmdp::ExperimentConfig cfg = rcmdp::load_experiment_config(run_config);
            if (run_seed) cfg.seed = *run_seed;
            if (run_out) cfg.out_dir = *run_out;
            if (run_radius) {
                cfg.radii = parse_radius_list(*run_radius);
                for (double r : cfg.radii)
                    rcmdp::check_model(rcmdp::with_radius(cfg.model, r),
                                       cfg.instance.n_states);
            }
            if (run_exact_oracle) cfg.exact_oracle = true;
            if (run_quiet) cfg.quiet = true;
            out_dir_for_errors = cfg.out_dir;
            const auto dirs = rcmdp::run_experiment(cfg);
            if (!cfg.quiet)
                for (const auto& d : dirs) std::cout << "run complete: " << d << "\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            const rcmdp::TabularRcmdp mdp = rcmdp::load_instance(eval_instance_path);
            const rcmdp::PolicyTable policy = rcmdp::load_policy(eval_policy_path);
            if (policy.stochasticity_residual() > rcmdp::kPolicyTol)
                throw rcmdp::StructuralError("policy rows are not stochastic");

            rcmdp::UncertaintyModel model;
            if (eval_model == "contamination")
                model = rcmdp::Contamination{eval_radius};
            else if (eval_model == "total-variation")
                model = rcmdp::TotalVariation{eval_radius};
            else if (eval_model == "wasserstein")
                model = rcmdp::Wasserstein{eval_order, eval_radius,
                                           eval_metric == "discrete"
                                               ? rcmdp::discrete_metric(mdp.n_states)
                                               : rcmdp::line_metric(mdp.n_states)};
            else
                throw rcmdp::ConfigError("unknown model '" + eval_model + "'");
            rcmdp::check_model(model, mdp.n_states);

            const double lambda =
                eval_lambda ? *eval_lambda
                            : 4.0 / std::max(eval_epsilon, eval_zeta);
            rcmdp::CriticConfig critic_cfg;
            critic_cfg.t_value_iters = eval_value_iters;
            critic_cfg.t_gain_iters = eval_gain_iters;
            const auto mode = eval_mode == "critic" ? rcmdp::EvalMode::Critic
                                                    : rcmdp::EvalMode::Oracle;
            const auto report = rcmdp::eval_policy(mdp, policy, model, lambda,
                                                   eval_zeta, mode, critic_cfg,
                                                   eval_seed);
            std::cout << rcmdp::eval_report_to_json(report, mdp.thresholds);
            return 0;
        }
    } catch (const rcmdp::DivergenceError& e) {
        print_error_record("divergence", e.what(), out_dir_for_errors);
        return 3;
    } catch (const rcmdp::NoConvergence& e) {
        print_error_record("no-convergence", e.what(), out_dir_for_errors);
        return 4;
    } catch (const rcmdp::ConfigError& e) {
        print_error_record("config", e.what(), out_dir_for_errors);
        return 2;
    } catch (const rcmdp::ParseError& e) {
        print_error_record("parse", e.what(), out_dir_for_errors);
        return 2;
    } catch (const rcmdp::ParamError& e) {
        print_error_record("param", e.what(), out_dir_for_errors);
        return 2;
    } catch (const rcmdp::StructuralError& e) {
        print_error_record("structural", e.what(), out_dir_for_errors);
        return 2;
    } catch (const rcmdp::BudgetExceeded& e) {
        print_error_record("budget", e.what(), out_dir_for_errors);
        return 2;
    } catch (const std::exception& e) {
        print_error_record("internal", e.what(), out_dir_for_errors);
        return 1;
    }
    return 0;
}
