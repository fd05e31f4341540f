#pragma once

#include "rcmdp/types.hpp"

#include <cstdint>
#include <vector>

namespace rcmdp {

/// Random instance family: per (s,a) the kernel row has `branching`
/// distinct support states with Dirichlet(1) weights; cost and constraint
/// entries are i.i.d. uniform on [0,1]; the initial distribution is uniform.
struct GarnetParams {
    int n_states = 3;
    int n_actions = 2;
    int branching = 2;
    int n_constraints = 1;
    /// One per constraint; resized with 0.5 when left empty.
    numvec thresholds;
};

/// N x N grid, 4 move actions with slip probability (slip mass spread
/// uniformly over the other three moves), walls keep the agent in place.
/// Cost is 1 off the goal cell and 0 on it; the single constraint charges 1
/// on each of `hazard_count` seeded hazard cells.
struct GridworldParams {
    int n = 3;
    double slip = 0.1;
    int hazard_count = 1;
    double threshold = 0.25;
};

TabularRcmdp make_garnet(const GarnetParams& params, std::uint64_t seed);
TabularRcmdp make_gridworld(const GridworldParams& params, std::uint64_t seed);

} // namespace rcmdp
