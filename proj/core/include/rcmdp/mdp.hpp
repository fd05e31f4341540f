#pragma once

#include "rcmdp/errors.hpp"
#include "rcmdp/types.hpp"

#include <string>
#include <vector>

namespace rcmdp {

/// Outcome of the ergodicity probe for one tested policy.
struct PolicyCheck {
    std::string policy;
    bool irreducible = false;
    bool aperiodic = false;
};

struct ValidationReport {
    bool structural_ok = true;
    std::vector<std::string> structural_violations;
    /// Uniform policy first, then the sampled deterministic policies.
    std::vector<PolicyCheck> policy_checks;
    std::vector<std::string> ergodicity_warnings;

    bool all_ergodic() const;
    /// Raises StructuralError when any stochasticity or range check failed.
    void require_structural() const;
};

/**
 * Structural and ergodicity checks for an instance.
 *
 * Structural: every kernel row and the initial distribution must be
 * nonnegative and sum to 1 within 1e-12; cost and constraint entries must
 * lie in [0, 1]; thresholds must match the constraint count.
 *
 * Ergodicity is a sampled probe, not a proof: the uniform policy plus
 * min(32, |A|^|S|) deterministic policies are tested for irreducibility
 * (strong connectivity of the induced chain) and aperiodicity (gcd of
 * cycle lengths). Failures are reported as warnings, never as errors.
 */
ValidationReport validate(const TabularRcmdp& mdp);

/// Whether the chain s -> sum_a pi(a|s) P(s'|s,a) is irreducible/aperiodic.
PolicyCheck check_chain(const FixedKernel& kernel, const PolicyTable& policy,
                        const std::string& label);

/**
 * Stationary distribution d of the chain induced by (kernel, policy):
 * d = d M with M(s,s') = sum_a pi(a|s) P(s'|s,a), sum_s d(s) = 1.
 *
 * Solved by a dense linear solve; raises SingularChain if the system is
 * rank-deficient beyond tolerance or the residual ||dM - d||_inf exceeds
 * 1e-10 (reducible or periodic chains).
 */
numvec stationary_distribution(const FixedKernel& kernel, const PolicyTable& policy);

struct FixedEval {
    double g = 0.0;
    numvec v;
};

/**
 * Exact average value and relative value function of a policy under a
 * single fixed kernel:
 *
 *   g    = sum_s d(s) sum_a pi(a|s) signal(s,a)
 *   V(s) = sum_a pi(a|s) ( signal(s,a) - g + sum_s' P(s'|s,a) V(s') )
 *
 * with V(anchor) = 0. Requires an ergodic induced chain.
 */
FixedEval evaluate_fixed(const FixedKernel& kernel, const PolicyTable& policy,
                         const IndexedSignal& signal, int anchor);

} // namespace rcmdp
