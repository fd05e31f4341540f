#include "rcmdp/sampling.hpp"

#include "rcmdp/errors.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>

namespace rcmdp {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

GenerativeModel::GenerativeModel(const TabularRcmdp& mdp, std::uint64_t seed)
    : mdp_(&mdp), seed_(seed), rng_(splitmix64(seed)) {}

double GenerativeModel::next_unit() {
    // top 53 bits -> [0, 1); avoids implementation-defined distributions
    return std::ldexp(static_cast<double>(rng_() >> 11), -53);
}

int GenerativeModel::sample_geometric_half() {
    const std::uint64_t word = rng_();
    return word == 0 ? 64 : std::countr_zero(word);
}

int GenerativeModel::sample_next(int s, int a) {
    const numvec& row = mdp_->nominal_kernel[s][a];
    ++draws_;
    const double u = next_unit();
    double acc = 0.0;
    for (int t = 0; t < static_cast<int>(row.size()); ++t) {
        acc += row[t];
        if (u < acc) return t;
    }
    // u landed in the rounding slack past the last positive entry
    for (int t = static_cast<int>(row.size()) - 1; t >= 0; --t)
        if (row[t] > 0.0) return t;
    return static_cast<int>(row.size()) - 1;
}

GenerativeModel GenerativeModel::split(std::uint64_t stream_index) const {
    return GenerativeModel(*mdp_, splitmix64(seed_ ^ splitmix64(stream_index + 1)));
}

void check_mlmc(const MlmcConfig& cfg) {
    if (cfg.n_max < 1) throw ParamError("mlmc n_max must be >= 1");
    if (cfg.geom_p != 0.5) throw ParamError("mlmc geom_p is fixed at 0.5");
}

double truncated_geometric_mass(int n, int n_max) {
    assert(n >= 0 && n <= n_max);
    if (n == n_max) return std::ldexp(1.0, -n_max);
    return std::ldexp(1.0, -(n + 1));
}

double estimate_sigma_contamination(GenerativeModel& gm, int s, int a, const numvec& v,
                                    double radius) {
    const int next = gm.sample_next(s, a);
    return (1.0 - radius) * v[next] + radius * *std::max_element(v.begin(), v.end());
}

namespace {

double empirical_sigma(const UncertaintyModel& model, const numvec& row, const numvec& v) {
    if (const auto* w = std::get_if<Wasserstein>(&model))
        return sigma_wasserstein_dual(*w, row, v);
    return sigma_exact(model, row, v).sigma;
}

} // namespace

double estimate_sigma_mlmc(GenerativeModel& gm, int s, int a, const numvec& v,
                           const UncertaintyModel& model, const MlmcConfig& cfg) {
    if (std::holds_alternative<Contamination>(model))
        throw ParamError("the multilevel estimator covers TV and Wasserstein sets only");
    check_mlmc(cfg);

    const int level = std::min(gm.sample_geometric_half(), cfg.n_max);
    const int pairs = 1 << level; // 2^(level+1) draws in all
    const int n = static_cast<int>(v.size());

    numvec full(n, 0.0), even(n, 0.0), odd(n, 0.0);
    int first = 0;
    const double half_w = 1.0 / pairs;
    for (int i = 0; i < 2 * pairs; ++i) {
        const int next = gm.sample_next(s, a);
        if (i == 0) first = next;
        full[next] += 0.5 * half_w;
        (i % 2 == 0 ? odd : even)[next] += half_w; // draws are 1-indexed in spirit
    }

    numvec point(n, 0.0);
    point[first] = 1.0;

    const double sigma_one = empirical_sigma(model, point, v);
    const double correction = empirical_sigma(model, full, v) -
                              0.5 * (empirical_sigma(model, even, v) +
                                     empirical_sigma(model, odd, v));
    return sigma_one + correction / truncated_geometric_mass(level, cfg.n_max);
}

double estimate_sigma(GenerativeModel& gm, int s, int a, const numvec& v,
                      const UncertaintyModel& model, const MlmcConfig& cfg) {
    if (const auto* c = std::get_if<Contamination>(&model))
        return estimate_sigma_contamination(gm, s, a, v, c->radius);
    return estimate_sigma_mlmc(gm, s, a, v, model, cfg);
}

} // namespace rcmdp
