#include "rcmdp/critic.hpp"

#include "rcmdp/errors.hpp"

#include <cassert>
#include <cmath>

namespace rcmdp {

double StepSchedule::at(long t) const { return c / std::pow(1.0 + t, exponent); }

void check_critic(const CriticConfig& cfg, int n_states) {
    if (cfg.t_value_iters < 0 || cfg.t_gain_iters < 0)
        throw ConfigError("critic iteration counts must be nonnegative");
    if (cfg.eta.c <= 0.0 || cfg.beta.c <= 0.0)
        throw ConfigError("critic step sizes must be positive");
    if (cfg.anchor < 0 || cfg.anchor >= n_states)
        throw ConfigError("critic anchor state out of range");
    check_mlmc(cfg.mlmc);
}

namespace {

double sigma_hat(GenerativeModel& gm, int s, int a, const numvec& v,
                 const UncertaintyModel& model, const CriticConfig& cfg) {
    if (cfg.exact_sigma)
        return sigma_exact(model, gm.mdp().nominal_kernel[s][a], v).sigma;
    return estimate_sigma(gm, s, a, v, model, cfg.mlmc);
}

} // namespace

RobustEval td_evaluate(GenerativeModel& gm, const PolicyTable& policy,
                       const IndexedSignal& signal, const UncertaintyModel& model,
                       const CriticConfig& cfg) {
    const TabularRcmdp& mdp = gm.mdp();
    const int n = mdp.n_states;
    const int m = mdp.n_actions;
    check_critic(cfg, n);
    check_model(model, n);

    const double blow_up = cfg.blow_up_factor * (1.0 + signal.span());

    numvec v(n, 0.0);
    numvec target(n, 0.0);

    // Value loop: synchronous sweep; every state's backup reads the same
    // V_t snapshot, then the iterate is re-anchored.
    for (long t = 0; t < cfg.t_value_iters; ++t) {
        for (int s = 0; s < n; ++s) {
            double backup = 0.0;
            for (int a = 0; a < m; ++a) {
                const double w = policy.probs[s][a];
                if (w == 0.0) continue;
                backup += w * (signal.values[s][a] - cfg.g0 +
                               sigma_hat(gm, s, a, v, model, cfg));
            }
            target[s] = backup;
        }
        const double eta = cfg.eta.at(t);
        for (int s = 0; s < n; ++s) v[s] += eta * (target[s] - v[s]);
        const double shift = v[cfg.anchor];
        double worst = 0.0;
        for (int s = 0; s < n; ++s) {
            v[s] -= shift;
            worst = std::max(worst, std::abs(v[s]));
        }
        if (worst > blow_up)
            throw DivergenceError("value iterate exceeded blow-up bound " +
                                  std::to_string(blow_up) + " at step " +
                                  std::to_string(t) + "; step sizes likely mis-set");
    }

    // Gain loop against the frozen value function; support estimates are
    // re-sampled every iteration.
    double g = 0.0;
    for (long t = 0; t < cfg.t_gain_iters; ++t) {
        double delta_bar = 0.0;
        for (int s = 0; s < n; ++s) {
            double delta = -v[s];
            for (int a = 0; a < m; ++a) {
                const double w = policy.probs[s][a];
                if (w == 0.0) continue;
                delta += w * (signal.values[s][a] + sigma_hat(gm, s, a, v, model, cfg));
            }
            delta_bar += delta;
        }
        delta_bar /= n;
        g += cfg.beta.at(t) * (delta_bar - g);
    }

    RobustEval eval;
    eval.g = g;
    eval.v = std::move(v);
    eval.index = signal.index;
    return eval;
}

double bellman_residual(const TabularRcmdp& mdp, const PolicyTable& policy,
                        const IndexedSignal& signal, const UncertaintyModel& model,
                        const RobustEval& eval) {
    const int n = mdp.n_states;
    numvec gap(n, 0.0);
    for (int s = 0; s < n; ++s) {
        double backup = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double w = policy.probs[s][a];
            if (w == 0.0) continue;
            backup += w * (signal.values[s][a] - eval.g +
                           sigma_exact(model, mdp.nominal_kernel[s][a], eval.v).sigma);
        }
        gap[s] = backup - eval.v[s];
    }
    return span_seminorm(gap);
}

} // namespace rcmdp
