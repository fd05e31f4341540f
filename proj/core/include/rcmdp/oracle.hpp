#pragma once

#include "rcmdp/mdp.hpp"
#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

namespace rcmdp {

/// Exact robust evaluation: converged (g, V), an achieving worst-case
/// kernel, and the final span residual of the robust evaluation equations.
struct OracleEval {
    double g = 0.0;
    numvec v;
    FixedKernel worst_kernel;
    double residual = 0.0;
    int index = 0;
};

/**
 * Exact robust policy evaluation by kernel iteration: alternate
 *   (i)  extract the worst-case kernel for the current V row by row,
 *   (ii) evaluate the policy exactly under that kernel,
 * until the exact-support span residual drops below 1e-8, up to 10^4
 * alternations. The adversary's value is monotone along the iteration.
 * Raises NoConvergence (with the last residual) if the tolerance is not
 * reached — never silently truncates.
 */
OracleEval robust_evaluate(const TabularRcmdp& mdp, const PolicyTable& policy,
                           const IndexedSignal& signal, const UncertaintyModel& model,
                           int anchor = 0);

struct ExactF {
    double f = 0.0;
    int active_index = 0;
    /// Exact robust g for indices 0..I.
    numvec g_values;
};

/// Exact scalarized objective: robust_evaluate over all indices composed
/// with the F rule.
ExactF exact_f(const TabularRcmdp& mdp, const PolicyTable& policy,
               const UncertaintyModel& model, double lambda, double zeta);

struct GridOptimum {
    PolicyTable policy;
    double g_star = 0.0;
    bool feasible = false;
    long enumerated = 0;
};

/**
 * Exhaustive constrained optimum over the per-state simplex grid with the
 * given spacing: every grid policy is robustly evaluated on all indices;
 * among feasible policies the one with minimal robust cost wins (first in
 * enumeration order on ties). If no grid policy is feasible, the policy
 * with the smallest worst violation is returned flagged infeasible.
 * grid_step = 1 enumerates exactly the deterministic policies.
 *
 * Raises BudgetExceeded if the grid has more than max_policies entries.
 */
GridOptimum grid_optimal(const TabularRcmdp& mdp, const UncertaintyModel& model,
                         double grid_step, long max_policies = 1000000);

} // namespace rcmdp
