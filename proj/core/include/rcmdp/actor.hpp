#pragma once

#include "rcmdp/critic.hpp"
#include "rcmdp/sampling.hpp"
#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rcmdp {

/// Which F values pick the returned iterate.
enum class BestIterateMode {
    /// The critic's own g estimates (model-free; the default).
    CriticEstimates,
    /// Fresh exact evaluations per iterate (test/diagnostic mode).
    ExactOracle,
};

struct ActorConfig {
    long total_iters = 100;
    /// Unset: eta = epsilon / (2 C Q_max^2) with Q_max = 1 + the largest
    /// value-function span observed so far.
    std::optional<double> step_size;
    double epsilon = 0.05;
    double zeta = 0.0;
    /// Unset: lambda = 4 / max(epsilon, zeta).
    std::optional<double> lambda;
    /// The distribution-mismatch constant in the default step rule; not
    /// observable from data, exposed as a knob.
    double mismatch_const = 1.0;
    CriticConfig critic{};
    BestIterateMode best_iterate_mode = BestIterateMode::CriticEstimates;
    /// Exact support functions in the Q tables as well (test mode).
    bool exact_sigma = false;
    /// Log the exact F of every iterate without changing how the returned
    /// iterate is selected.
    bool record_exact_f = false;
};

/// Resolved trade-off weight; raises ConfigError when not positive or when
/// the auto rule divides by max(epsilon, zeta) = 0.
double lambda_of(const ActorConfig& cfg);

/// Q table for one signal index: Q(s,a) = signal(s,a) - g + sigma(V).
struct QTable {
    sa_table values;
    int index = 0;
};

struct FValue {
    double f = 0.0;
    int active_index = 0;
};

/**
 * Scalarized objective over the I+1 average values:
 *     F = max( g[0] / lambda,  max_i ( g[i] - b[i] + zeta ) )
 * with the attaining term's index; ties break toward the lowest index
 * (the cost term counts as index 0). Depends on the g estimates only,
 * never on Q values.
 */
FValue f_value(const numvec& g_values, const numvec& thresholds, double lambda,
               double zeta);

/// Euclidean projection onto the probability simplex (sort-threshold form).
numvec project_to_simplex(numvec v);

/// Q from a critic evaluation with exact support functions.
QTable build_q_exact(const TabularRcmdp& mdp, const UncertaintyModel& model,
                     const IndexedSignal& signal, const RobustEval& eval);

/// Q from a critic evaluation with one support-estimator call per (s,a).
QTable build_q_sampled(GenerativeModel& gm, const UncertaintyModel& model,
                       const IndexedSignal& signal, const RobustEval& eval,
                       const MlmcConfig& mlmc);

/**
 * Proximal policy step: per state, the Euclidean projection onto the
 * simplex of  pi(.|s) - (eta/2) Q(s,.)  — the closed-form minimizer of
 *     eta <Q(s,.), p> + ||p - pi(.|s)||^2.
 */
PolicyTable policy_update(const PolicyTable& policy, const QTable& q, double eta);

struct IterationRecord {
    long t = 0;
    /// Critic g estimates for indices 0..I.
    numvec g_hat;
    double f_hat = 0.0;
    int active_index = 0;
    std::uint64_t policy_hash = 0;
    double wall_clock_s = 0.0;
    /// Present when best_iterate_mode == ExactOracle.
    std::optional<double> f_exact;
};

struct RunTrace {
    std::vector<IterationRecord> records;
    long best_t = -1;
};

struct RunResult {
    PolicyTable policy;
    RunTrace trace;
};

/**
 * The primal outer loop. Per iteration: robust critic evaluation for every
 * index, Q-table construction, active-index selection on the critic's g
 * estimates, and a proximal update with the active index's Q table. Returns
 * the iterate minimizing F (per best_iterate_mode) and the full trace.
 *
 * Per-index critic streams derive from gm by the documented split rule, so
 * results are identical however the index evaluations are scheduled.
 */
RunResult run(const TabularRcmdp& mdp, const UncertaintyModel& model,
              const ActorConfig& cfg, GenerativeModel& gm,
              const PolicyTable* initial_policy = nullptr);

} // namespace rcmdp
