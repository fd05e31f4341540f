#pragma once

#include <cstdint>
#include <vector>

namespace rcmdp {

using numvec = std::vector<double>;
/// Dense [state][action] table.
using sa_table = std::vector<numvec>;
/// Dense [state][action][next-state] kernel.
using kernel_table = std::vector<std::vector<numvec>>;

/// Row-stochasticity tolerance for transition kernels and distributions.
inline constexpr double kKernelTol = 1e-12;
/// Row-stochasticity tolerance for policies.
inline constexpr double kPolicyTol = 1e-10;

/// A randomized stationary policy: one distribution over actions per state.
struct PolicyTable {
    std::vector<numvec> probs;

    int n_states() const { return static_cast<int>(probs.size()); }
    int n_actions() const { return probs.empty() ? 0 : static_cast<int>(probs[0].size()); }

    static PolicyTable uniform(int n_states, int n_actions) {
        PolicyTable p;
        p.probs.assign(n_states, numvec(n_actions, 1.0 / n_actions));
        return p;
    }

    /// Max deviation of any row from stochasticity (negative mass counts too).
    double stochasticity_residual() const;
    /// FNV-1a over the raw double bytes; stable across identical runs.
    std::uint64_t hash() const;
};

/// A single transition kernel (one member of an ambiguity set).
struct FixedKernel {
    kernel_table trans;

    int n_states() const { return static_cast<int>(trans.size()); }
    int n_actions() const { return trans.empty() ? 0 : static_cast<int>(trans[0].size()); }
};

/// One stage signal: index 0 is the cost, index i >= 1 is constraint i.
struct IndexedSignal {
    int index = 0;
    sa_table values;

    double span() const;
};

/// Finite constrained MDP with a nominal kernel: cost, I constraint tables
/// with thresholds, transition kernel, and an initial state distribution.
struct TabularRcmdp {
    int n_states = 0;
    int n_actions = 0;
    sa_table cost;
    std::vector<sa_table> constraints;
    numvec thresholds;
    kernel_table nominal_kernel;
    numvec initial_dist;

    int constraint_count() const { return static_cast<int>(constraints.size()); }

    /// Signal table for index 0 (cost) or index i >= 1 (constraint i).
    IndexedSignal signal(int index) const;

    FixedKernel nominal() const { return FixedKernel{nominal_kernel}; }
};

} // namespace rcmdp
