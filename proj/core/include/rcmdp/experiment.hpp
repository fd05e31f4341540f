#pragma once

#include "rcmdp/io.hpp"

#include <string>
#include <vector>

namespace rcmdp {

inline constexpr const char* kCodeVersion = "rcmdp 0.1.0";

/**
 * Runs every radius x repetition of the experiment, fanning runs out over
 * worker threads (capped by cfg.threads, the RCMDP_THREADS environment
 * variable, and hardware concurrency). Each run owns a PRNG stream derived
 * from the root seed and its (radius index, repetition index) and writes
 * trace.csv, summary.json, and meta.json into its own directory
 * `<out_dir>/r<radius_idx>_rep<rep_idx>`. Returns the run directories in
 * (radius, repetition) order.
 */
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

enum class EvalMode { Oracle, Critic };

struct EvalReport {
    numvec g_values;
    std::vector<bool> feasible;
    double f = 0.0;
    int active_index = 0;
    EvalMode mode = EvalMode::Oracle;
};

/// Evaluates a fixed policy on all indices: exact kernel iteration in
/// Oracle mode, the TD critic with the given budgets in Critic mode.
EvalReport eval_policy(const TabularRcmdp& mdp, const PolicyTable& policy,
                       const UncertaintyModel& model, double lambda, double zeta,
                       EvalMode mode, const CriticConfig& critic_cfg,
                       std::uint64_t seed);

std::string eval_report_to_json(const EvalReport& report, const numvec& thresholds);

} // namespace rcmdp
