#pragma once

#include "rcmdp/sampling.hpp"
#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

namespace rcmdp {

/// Step-size rule c / (1 + t)^exponent.
struct StepSchedule {
    double c = 1.0;
    double exponent = 1.0;

    double at(long t) const;
};

struct CriticConfig {
    long t_value_iters = 10000;
    long t_gain_iters = 1000;
    /// V-loop steps; default keeps early steps large for the
    /// non-contractive operator while satisfying Robbins-Monro.
    StepSchedule eta{0.5, 0.6};
    /// g-loop steps; 1/(1+t) makes g_T the running mean of the deltas.
    StepSchedule beta{1.0, 1.0};
    int anchor = 0;
    MlmcConfig mlmc{};
    double g0 = 0.0;
    /// Test hook: replace sampled sigma-hat with the exact support function,
    /// isolating stochastic-approximation error from estimator noise.
    bool exact_sigma = false;
    /// V iterates beyond blow_up_factor * (1 + span(signal)) raise
    /// DivergenceError (mis-set step sizes).
    double blow_up_factor = 1e3;
};

void check_critic(const CriticConfig& cfg, int n_states);

/// Robust evaluation of one signal index: average value g and relative
/// value function V with V[anchor] = 0.
struct RobustEval {
    double g = 0.0;
    numvec v;
    int index = 0;
};

/**
 * Robust average-value TD evaluation of a policy for one signal index.
 *
 * Phase 1 (t_value_iters steps): for every (s,a) obtain a support estimate
 * sigma-hat(V_t), form the empirical operator
 *     T(V_t)(s) = sum_a pi(a|s) [ signal(s,a) - g0 + sigma-hat(V_t) ],
 * move V one eta_t step toward it, then re-anchor V(anchor) to 0.
 * All states update synchronously from the same V_t snapshot.
 *
 * Phase 2 (t_gain_iters steps): with V frozen at V_T, re-sample sigma-hat
 * each iteration, form delta(s) = sum_a pi(a|s)[signal + sigma-hat] - V_T(s),
 * and move g one beta_t step toward the state-average of delta.
 */
RobustEval td_evaluate(GenerativeModel& gm, const PolicyTable& policy,
                       const IndexedSignal& signal, const UncertaintyModel& model,
                       const CriticConfig& cfg);

/**
 * Span seminorm of T_g(V) - V where T_g uses the exact support function:
 * the convergence diagnostic thresholded by the acceptance suite. Zero at
 * an exact solution of the robust evaluation equations and invariant to
 * constant shifts of V.
 */
double bellman_residual(const TabularRcmdp& mdp, const PolicyTable& policy,
                        const IndexedSignal& signal, const UncertaintyModel& model,
                        const RobustEval& eval);

} // namespace rcmdp
