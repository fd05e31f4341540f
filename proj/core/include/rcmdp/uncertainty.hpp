#pragma once

#include "rcmdp/errors.hpp"
#include "rcmdp/types.hpp"

#include <string>
#include <variant>

namespace rcmdp {

/// Mixture set { (1-R) p + R q : q in the simplex }, R in [0,1).
/// R = 0 is accepted as the degenerate nominal-only set.
struct Contamination {
    double radius = 0.0;
};

/// L1 ball { q in the simplex : 0.5 ||q - p||_1 <= R }, R in [0,1].
struct TotalVariation {
    double radius = 0.0;
};

/// Transport ball { q : W_l(p, q) <= R } for a ground metric on states.
/// `metric` must be symmetric with a zero diagonal. R = 0 degenerates to
/// the nominal row under a genuine metric.
struct Wasserstein {
    double order = 1.0;
    double radius = 0.0;
    std::vector<numvec> metric;
};

using UncertaintyModel = std::variant<Contamination, TotalVariation, Wasserstein>;

/// Ground metric d(i,j) = |i - j|.
std::vector<numvec> line_metric(int n_states);
/// Ground metric d(i,j) = 1 for i != j. The order-1 ball under this metric
/// coincides with the total-variation ball of the same radius.
std::vector<numvec> discrete_metric(int n_states);

double radius_of(const UncertaintyModel& model);
UncertaintyModel with_radius(UncertaintyModel model, double radius);
std::string model_name(const UncertaintyModel& model);

/// Raises ParamError on out-of-range radius, non-symmetric metric, wrong
/// metric size, or order < 1.
void check_model(const UncertaintyModel& model, int n_states);

/// max(v) - min(v).
double span_seminorm(const numvec& v);

struct SupportResult {
    double sigma = 0.0;
    /// An extreme row achieving sigma; lies in the set around the nominal row.
    numvec worst_row;
};

/**
 * Exact support function of the per-(s,a) ambiguity set: the adversarial
 * extreme  sigma = max { q . v : q in set(nominal_row) }  together with an
 * achieving row.
 *
 * Contamination: closed form (1-R) p.v + R max_s v(s), achieved by
 * (1-R) p + R e_argmax.
 *
 * Total variation: the L1-ball linear program solved exactly by greedy
 * mass transfer: up to R probability is taken from the lowest-v states in
 * ascending order and placed on the argmax-v state.
 *
 * Wasserstein: the transport linear program
 *     max q.v  s.t.  exists coupling gamma with marginals (p, q),
 *                    sum gamma(x,y) d(x,y)^l <= R^l
 * solved exactly by a parametric greedy: per source state the reachable
 * (cost, value) pairs are reduced to their upper concave hull, and hull
 * segments are consumed globally in decreasing gain/cost order until the
 * budget R^l is spent.
 *
 * Ties in argmax v break toward the lowest state index.
 */
SupportResult sigma_exact(const UncertaintyModel& model, const numvec& nominal_row,
                          const numvec& v);

/**
 * Dual route for the Wasserstein support function:
 *     inf_{lambda >= 0}  lambda R^l + sum_x p(x) max_y ( v(y) - lambda d(x,y)^l )
 * minimized over a bracketing grid plus golden-section refinement to 1e-8.
 * Used on empirical rows inside the sampled estimator; agrees with the
 * transport LP by strong duality.
 */
double sigma_wasserstein_dual(const Wasserstein& model, const numvec& row, const numvec& v);

/// Assembles the achieving row of sigma_exact for every (s,a) into a kernel.
FixedKernel worst_case_kernel(const UncertaintyModel& model, const TabularRcmdp& mdp,
                              const numvec& v);

/// Membership residual of `row` in the set around `nominal_row` (0 = inside).
double set_membership_residual(const UncertaintyModel& model, const numvec& nominal_row,
                               const numvec& row);

/// l-th power of the W_l distance between p and q: the exact min-cost
/// transport under metric^l, solved by successive shortest paths.
double transport_cost_pow(const numvec& p, const numvec& q,
                          const std::vector<numvec>& metric, double order);

} // namespace rcmdp
