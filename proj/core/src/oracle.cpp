#include "rcmdp/oracle.hpp"

#include "rcmdp/errors.hpp"
#include "rcmdp/actor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>

namespace rcmdp {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr int kMaxAlternations = 10000;

// Pointwise gap of the robust evaluation equations at (g, v). The sup norm
// drives the stopping rule (a constant gap means g itself is off, which the
// span cannot see); the span is what OracleEval reports.
numvec exact_bellman_gap(const TabularRcmdp& mdp, const PolicyTable& policy,
                         const IndexedSignal& signal, const UncertaintyModel& model,
                         double g, const numvec& v) {
    numvec gap(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double backup = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double w = policy.probs[s][a];
            if (w == 0.0) continue;
            backup += w * (signal.values[s][a] - g +
                           sigma_exact(model, mdp.nominal_kernel[s][a], v).sigma);
        }
        gap[s] = backup - v[s];
    }
    return gap;
}

double sup_norm(const numvec& v) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x));
    return worst;
}

// Simplex grid with `levels` steps: all compositions of `levels` into
// n_actions parts, visited lexicographically.
void for_each_grid_row(int n_actions, int levels,
                       const std::function<void(const numvec&)>& visit) {
    numvec row(n_actions, 0.0);
    std::function<void(int, int)> rec = [&](int a, int left) {
        if (a == n_actions - 1) {
            row[a] = static_cast<double>(left) / levels;
            visit(row);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            row[a] = static_cast<double>(k) / levels;
            rec(a + 1, left - k);
        }
    };
    rec(0, levels);
}

} // namespace

OracleEval robust_evaluate(const TabularRcmdp& mdp, const PolicyTable& policy,
                           const IndexedSignal& signal, const UncertaintyModel& model,
                           int anchor) {
    check_model(model, mdp.n_states);

    OracleEval out;
    out.index = signal.index;
    out.v.assign(mdp.n_states, 0.0);
    out.worst_kernel = mdp.nominal();
    double residual = std::numeric_limits<double>::infinity();

    for (int round = 0; round <= kMaxAlternations; ++round) {
        const numvec gap = exact_bellman_gap(mdp, policy, signal, model, out.g, out.v);
        residual = sup_norm(gap);
        out.residual = span_seminorm(gap);
        if (residual <= kResidualTol) return out;
        if (round == kMaxAlternations) break;

        out.worst_kernel = worst_case_kernel(model, mdp, out.v);
        const FixedEval eval = evaluate_fixed(out.worst_kernel, policy, signal, anchor);
        out.g = eval.g;
        out.v = eval.v;
    }
    throw NoConvergence("robust evaluation stalled at residual " +
                            std::to_string(residual),
                        residual);
}

ExactF exact_f(const TabularRcmdp& mdp, const PolicyTable& policy,
               const UncertaintyModel& model, double lambda, double zeta) {
    ExactF out;
    const int n_indices = mdp.constraint_count() + 1;
    out.g_values.assign(n_indices, 0.0);
    for (int i = 0; i < n_indices; ++i)
        out.g_values[i] = robust_evaluate(mdp, policy, mdp.signal(i), model).g;
    const FValue fv = f_value(out.g_values, mdp.thresholds, lambda, zeta);
    out.f = fv.f;
    out.active_index = fv.active_index;
    return out;
}

GridOptimum grid_optimal(const TabularRcmdp& mdp, const UncertaintyModel& model,
                         double grid_step, long max_policies) {
    if (!(grid_step > 0.0 && grid_step <= 1.0))
        throw ParamError("grid_step must lie in (0, 1]");
    const int levels = static_cast<int>(std::lround(1.0 / grid_step));

    std::vector<numvec> rows;
    for_each_grid_row(mdp.n_actions, levels, [&](const numvec& row) {
        rows.push_back(row);
    });

    double count = 1.0;
    for (int s = 0; s < mdp.n_states; ++s) count *= static_cast<double>(rows.size());
    if (count > static_cast<double>(max_policies))
        throw BudgetExceeded("policy grid of " + std::to_string(count) +
                                 " entries exceeds budget " +
                                 std::to_string(max_policies),
                             static_cast<long>(std::min(
                                 count, static_cast<double>(
                                            std::numeric_limits<long>::max()))));

    const int n_indices = mdp.constraint_count() + 1;
    GridOptimum best;
    best.g_star = std::numeric_limits<double>::infinity();
    double best_violation = std::numeric_limits<double>::infinity();
    PolicyTable least_infeasible;
    double least_infeasible_g = std::numeric_limits<double>::infinity();

    PolicyTable candidate;
    candidate.probs.assign(mdp.n_states, numvec(mdp.n_actions, 0.0));
    std::vector<size_t> pick(mdp.n_states, 0);

    while (true) {
        for (int s = 0; s < mdp.n_states; ++s) candidate.probs[s] = rows[pick[s]];
        ++best.enumerated;

        numvec g(n_indices, 0.0);
        for (int i = 0; i < n_indices; ++i)
            g[i] = robust_evaluate(mdp, candidate, mdp.signal(i), model).g;

        double violation = 0.0;
        for (int i = 1; i < n_indices; ++i)
            violation = std::max(violation, g[i] - mdp.thresholds[i - 1]);

        if (violation <= 0.0) {
            if (g[0] < best.g_star) {
                best.g_star = g[0];
                best.policy = candidate;
                best.feasible = true;
            }
        } else if (!best.feasible &&
                   (violation < best_violation ||
                    (violation == best_violation && g[0] < least_infeasible_g))) {
            best_violation = violation;
            least_infeasible = candidate;
            least_infeasible_g = g[0];
        }

        int s = mdp.n_states - 1;
        while (s >= 0 && ++pick[s] == rows.size()) pick[s--] = 0;
        if (s < 0) break;
    }

    if (!best.feasible) {
        best.policy = least_infeasible;
        best.g_star = least_infeasible_g;
    }
    return best;
}

} // namespace rcmdp
