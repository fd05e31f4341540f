#include "rcmdp/actor.hpp"

#include "rcmdp/errors.hpp"
#include "rcmdp/mdp.hpp"
#include "rcmdp/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace rcmdp {

double lambda_of(const ActorConfig& cfg) {
    double lambda;
    if (cfg.lambda) {
        lambda = *cfg.lambda;
    } else {
        const double denom = std::max(cfg.epsilon, cfg.zeta);
        if (denom <= 0.0)
            throw ConfigError("auto lambda rule needs max(epsilon, zeta) > 0");
        lambda = 4.0 / denom;
    }
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    return lambda;
}

FValue f_value(const numvec& g_values, const numvec& thresholds, double lambda,
               double zeta) {
    assert(g_values.size() == thresholds.size() + 1);
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    FValue out;
    out.f = g_values[0] / lambda;
    out.active_index = 0;
    for (size_t i = 0; i < thresholds.size(); ++i) {
        const double term = g_values[i + 1] - thresholds[i] + zeta;
        if (term > out.f) {
            out.f = term;
            out.active_index = static_cast<int>(i + 1);
        }
    }
    return out;
}

numvec project_to_simplex(numvec v) {
    const int n = static_cast<int>(v.size());
    numvec sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0;
    double theta = 0.0;
    for (int j = 0; j < n; ++j) {
        running += sorted[j];
        const double candidate = (running - 1.0) / (j + 1);
        if (sorted[j] - candidate > 0.0) theta = candidate;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
    return v;
}

QTable build_q_exact(const TabularRcmdp& mdp, const UncertaintyModel& model,
                     const IndexedSignal& signal, const RobustEval& eval) {
    QTable q;
    q.index = eval.index;
    q.values.assign(mdp.n_states, numvec(mdp.n_actions, 0.0));
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            q.values[s][a] = signal.values[s][a] - eval.g +
                             sigma_exact(model, mdp.nominal_kernel[s][a], eval.v).sigma;
    return q;
}

QTable build_q_sampled(GenerativeModel& gm, const UncertaintyModel& model,
                       const IndexedSignal& signal, const RobustEval& eval,
                       const MlmcConfig& mlmc) {
    const TabularRcmdp& mdp = gm.mdp();
    QTable q;
    q.index = eval.index;
    q.values.assign(mdp.n_states, numvec(mdp.n_actions, 0.0));
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            q.values[s][a] = signal.values[s][a] - eval.g +
                             estimate_sigma(gm, s, a, eval.v, model, mlmc);
    return q;
}

PolicyTable policy_update(const PolicyTable& policy, const QTable& q, double eta) {
    PolicyTable next = policy;
    const int n = policy.n_states();
    const int m = policy.n_actions();
    for (int s = 0; s < n; ++s) {
        numvec point(m);
        for (int a = 0; a < m; ++a)
            point[a] = policy.probs[s][a] - 0.5 * eta * q.values[s][a];
        next.probs[s] = project_to_simplex(std::move(point));
    }
    return next;
}

RunResult run(const TabularRcmdp& mdp, const UncertaintyModel& model,
              const ActorConfig& cfg, GenerativeModel& gm,
              const PolicyTable* initial_policy) {
    const double lambda = lambda_of(cfg);
    check_model(model, mdp.n_states);
    check_critic(cfg.critic, mdp.n_states);
    validate(mdp).require_structural();

    const int n_indices = mdp.constraint_count() + 1;
    PolicyTable policy = initial_policy
                             ? *initial_policy
                             : PolicyTable::uniform(mdp.n_states, mdp.n_actions);
    if (policy.stochasticity_residual() > kPolicyTol)
        throw StructuralError("initial policy is not row-stochastic");

    CriticConfig critic_cfg = cfg.critic;
    if (cfg.exact_sigma) critic_cfg.exact_sigma = true;

    RunResult result;
    result.policy = policy;
    double best_f = std::numeric_limits<double>::infinity();
    double max_span_seen = 0.0;
    const auto start = std::chrono::steady_clock::now();

    for (long t = 0; t < cfg.total_iters; ++t) {
        // Independent critic streams per index, derived from the iteration
        // stream, so index evaluations can be scheduled in any order.
        GenerativeModel iter_gm = gm.split(static_cast<std::uint64_t>(t));

        std::vector<QTable> qs;
        numvec g_hat(n_indices, 0.0);
        qs.reserve(n_indices);
        for (int i = 0; i < n_indices; ++i) {
            GenerativeModel index_gm = iter_gm.split(static_cast<std::uint64_t>(i));
            const IndexedSignal signal = mdp.signal(i);
            const RobustEval eval =
                td_evaluate(index_gm, policy, signal, model, critic_cfg);
            g_hat[i] = eval.g;
            max_span_seen = std::max(max_span_seen, span_seminorm(eval.v));
            qs.push_back(cfg.exact_sigma
                             ? build_q_exact(mdp, model, signal, eval)
                             : build_q_sampled(index_gm, model, signal, eval,
                                               critic_cfg.mlmc));
        }

        const FValue fv = f_value(g_hat, mdp.thresholds, lambda, cfg.zeta);

        IterationRecord rec;
        rec.t = t;
        rec.g_hat = g_hat;
        rec.f_hat = fv.f;
        rec.active_index = fv.active_index;
        rec.policy_hash = policy.hash();
        rec.wall_clock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();

        double selection_f = fv.f;
        if (cfg.best_iterate_mode == BestIterateMode::ExactOracle || cfg.record_exact_f) {
            const ExactF exact = exact_f(mdp, policy, model, lambda, cfg.zeta);
            rec.f_exact = exact.f;
            if (cfg.best_iterate_mode == BestIterateMode::ExactOracle)
                selection_f = exact.f;
        }
        result.trace.records.push_back(std::move(rec));

        if (selection_f < best_f) {
            best_f = selection_f;
            result.trace.best_t = t;
            result.policy = policy;
        }

        // Subgradient direction: the active index's Q table.
        const double q_max = 1.0 + max_span_seen;
        const double eta = cfg.step_size
                               ? *cfg.step_size
                               : cfg.epsilon / (2.0 * cfg.mismatch_const * q_max * q_max);
        policy = policy_update(policy, qs[fv.active_index], eta);
        assert(policy.stochasticity_residual() <= kPolicyTol);
    }

    return result;
}

} // namespace rcmdp
