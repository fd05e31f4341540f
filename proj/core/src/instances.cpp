#include "rcmdp/instances.hpp"

#include "rcmdp/errors.hpp"
#include "rcmdp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rcmdp {

namespace {

// Deterministic uniform double in [0,1) from raw engine output.
double unit(std::mt19937_64& rng) {
    return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

// Fisher-Yates prefix: the first k entries of a random permutation of 0..n-1.
std::vector<int> choose_k(std::mt19937_64& rng, int n, int k) {
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

// Dirichlet(1) weights via normalized exponential spacings.
numvec dirichlet_flat(std::mt19937_64& rng, int k) {
    numvec w(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const double u = std::max(unit(rng), 1e-300);
        w[i] = -std::log(u);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

} // namespace

TabularRcmdp make_garnet(const GarnetParams& params, std::uint64_t seed) {
    if (params.n_states < 1 || params.n_actions < 1)
        throw ParamError("garnet sizes must be >= 1");
    if (params.branching < 1 || params.branching > params.n_states)
        throw ParamError("garnet branching must lie in [1, n_states]");
    if (params.n_constraints < 0)
        throw ParamError("garnet constraint count must be >= 0");
    if (!params.thresholds.empty() &&
        static_cast<int>(params.thresholds.size()) != params.n_constraints)
        throw ParamError("garnet thresholds must match the constraint count");

    std::mt19937_64 rng(splitmix64(seed));
    const int n = params.n_states;
    const int m = params.n_actions;

    TabularRcmdp mdp;
    mdp.n_states = n;
    mdp.n_actions = m;
    mdp.nominal_kernel.assign(n, std::vector<numvec>(m, numvec(n, 0.0)));
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a) {
            const auto support = choose_k(rng, n, params.branching);
            const numvec weights = dirichlet_flat(rng, params.branching);
            for (int k = 0; k < params.branching; ++k)
                mdp.nominal_kernel[s][a][support[k]] = weights[k];
        }

    auto random_table = [&] {
        sa_table table(n, numvec(m, 0.0));
        for (int s = 0; s < n; ++s)
            for (int a = 0; a < m; ++a) table[s][a] = unit(rng);
        return table;
    };
    mdp.cost = random_table();
    for (int i = 0; i < params.n_constraints; ++i)
        mdp.constraints.push_back(random_table());
    mdp.thresholds = params.thresholds.empty()
                         ? numvec(params.n_constraints, 0.5)
                         : params.thresholds;
    mdp.initial_dist.assign(n, 1.0 / n);
    return mdp;
}

TabularRcmdp make_gridworld(const GridworldParams& params, std::uint64_t seed) {
    if (params.n < 1) throw ParamError("gridworld size must be >= 1");
    if (!(params.slip >= 0.0 && params.slip <= 1.0))
        throw ParamError("gridworld slip must lie in [0,1]");
    const int n = params.n * params.n;
    if (params.hazard_count < 0 || params.hazard_count >= n)
        throw ParamError("gridworld hazard count must lie in [0, n_states)");

    std::mt19937_64 rng(splitmix64(seed));
    const int goal = n - 1;

    // hazards never cover the goal
    std::vector<bool> hazard(n, false);
    {
        auto cells = choose_k(rng, n - 1, params.hazard_count);
        for (int c : cells) hazard[c] = true;
    }

    constexpr int kMoves[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    auto step = [&](int cell, int dir) {
        const int row = cell / params.n + kMoves[dir][0];
        const int col = cell % params.n + kMoves[dir][1];
        if (row < 0 || row >= params.n || col < 0 || col >= params.n) return cell;
        return row * params.n + col;
    };

    TabularRcmdp mdp;
    mdp.n_states = n;
    mdp.n_actions = 4;
    mdp.nominal_kernel.assign(n, std::vector<numvec>(4, numvec(n, 0.0)));
    mdp.cost.assign(n, numvec(4, 0.0));
    mdp.constraints.assign(1, sa_table(n, numvec(4, 0.0)));
    mdp.thresholds = {params.threshold};
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < 4; ++a) {
            mdp.nominal_kernel[s][a][step(s, a)] += 1.0 - params.slip;
            for (int d = 0; d < 4; ++d)
                if (d != a) mdp.nominal_kernel[s][a][step(s, d)] += params.slip / 3.0;
            mdp.cost[s][a] = s == goal ? 0.0 : 1.0;
            mdp.constraints[0][s][a] = hazard[s] ? 1.0 : 0.0;
        }
    mdp.initial_dist.assign(n, 0.0);
    mdp.initial_dist[0] = 1.0;
    return mdp;
}

} // namespace rcmdp
