#pragma once

#include "rcmdp/errors.hpp"
#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace rcmdp {

/// splitmix64 finalizer; the documented seed-derivation function.
std::uint64_t splitmix64(std::uint64_t x);

/**
 * Generative access to the nominal kernel: next-state draws for any queried
 * (s, a). Owns one PRNG stream (mt19937_64 seeded through splitmix64, raw
 * 64-bit outputs mapped to doubles via ldexp), so identical seeds yield
 * identical sample streams on any platform.
 */
class GenerativeModel {
  public:
    GenerativeModel(const TabularRcmdp& mdp, std::uint64_t seed);

    /// Next state drawn from nominal_kernel[s][a] by inverse CDF.
    int sample_next(int s, int a);

    /// Uniform double in [0, 1); 53 random bits.
    double next_unit();
    /// Geometric level N on {0, 1, ...} with P(N = n) = 2^-(n+1):
    /// trailing-zero count of one raw 64-bit word.
    int sample_geometric_half();

    /// Child stream for worker `stream_index`, derived as
    /// splitmix64(seed ^ splitmix64(stream_index + 1)). Streams for
    /// distinct indices are independent for all practical purposes.
    GenerativeModel split(std::uint64_t stream_index) const;

    const TabularRcmdp& mdp() const { return *mdp_; }
    std::uint64_t seed() const { return seed_; }
    /// Total next-state draws so far (diagnostics and sample-cost tests).
    std::uint64_t sample_count() const { return draws_; }

    static constexpr const char* kRngFamily = "mt19937_64/splitmix64/ldexp53";

  private:
    const TabularRcmdp* mdp_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    std::uint64_t draws_ = 0;
};

/// Truncation for the randomized-level estimator. geom_p is fixed at 0.5.
struct MlmcConfig {
    int n_max = 12;
    double geom_p = 0.5;
};

void check_mlmc(const MlmcConfig& cfg);

/// P(min(N, n_max) = n) for N ~ Geom(0.5) on {0, 1, ...}:
/// 2^-(n+1) for n < n_max and 2^-n_max at the truncation level.
double truncated_geometric_mass(int n, int n_max);

/**
 * One-sample support estimator for the contamination set:
 *     (1-R) v(s') + R max_x v(x),   s' ~ nominal(s, a).
 * Unbiased for the exact support function.
 */
double estimate_sigma_contamination(GenerativeModel& gm, int s, int a, const numvec& v,
                                    double radius);

/**
 * Truncated multilevel estimator for TV and Wasserstein supports.
 *
 * Draws a level N ~ Geom(0.5) truncated at n_max, collects 2^(N'+1) i.i.d.
 * next states, forms the full / even-half / odd-half empirical rows and the
 * first-sample point mass, evaluates the set's support function on each,
 * and returns
 *     sigma(P1) + [ sigma(full) - (sigma(even) + sigma(odd)) / 2 ] / p'(N')
 * where p' is the truncated geometric mass. The empirical support values
 * use the exact greedy for TV and the dual route for Wasserstein.
 *
 * Raises ParamError for a contamination model (it has its own estimator).
 */
double estimate_sigma_mlmc(GenerativeModel& gm, int s, int a, const numvec& v,
                           const UncertaintyModel& model, const MlmcConfig& cfg);

/// Dispatch: contamination -> one-sample estimator, TV/Wasserstein -> MLMC.
double estimate_sigma(GenerativeModel& gm, int s, int a, const numvec& v,
                      const UncertaintyModel& model, const MlmcConfig& cfg);

} // namespace rcmdp
