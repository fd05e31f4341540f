#include "rcmdp/sampling.hpp"
#include "rcmdp/errors.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rcmdp;

namespace {

TabularRcmdp row_instance(const numvec& row) {
    TabularRcmdp mdp;
    mdp.n_states = static_cast<int>(row.size());
    mdp.n_actions = 1;
    mdp.cost.assign(mdp.n_states, numvec(1, 0.0));
    mdp.nominal_kernel.assign(mdp.n_states, {row});
    mdp.initial_dist.assign(mdp.n_states, 1.0 / mdp.n_states);
    return mdp;
}

} // namespace

TEST_CASE("deterministic rows always produce the same next state") {
    const auto mdp = row_instance({0.0, 1.0, 0.0});
    GenerativeModel gm(mdp, 1);
    for (int i = 0; i < 100; ++i) CHECK(gm.sample_next(0, 0) == 1);
    CHECK(gm.sample_count() == 100);
}

TEST_CASE("sample frequencies match the row within a binomial interval") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 2);
    const int draws = 100000;
    int ones = 0;
    for (int i = 0; i < draws; ++i) ones += gm.sample_next(0, 0);
    const double freq = static_cast<double>(ones) / draws;
    const double sd = std::sqrt(0.25 / draws);
    CHECK(std::abs(freq - 0.5) <= 3.0 * sd);
}

TEST_CASE("identical seeds reproduce identical sample streams") {
    const auto mdp = row_instance({0.3, 0.4, 0.3});
    GenerativeModel a(mdp, 77), b(mdp, 77);
    for (int i = 0; i < 1000; ++i) CHECK(a.sample_next(0, 0) == b.sample_next(0, 0));

    GenerativeModel c = a.split(5), d = b.split(5);
    for (int i = 0; i < 100; ++i) CHECK(c.sample_next(1, 0) == d.sample_next(1, 0));
}

TEST_CASE("truncated geometric masses form a distribution") {
    for (int n_max : {1, 3, 12}) {
        double total = 0.0;
        for (int n = 0; n <= n_max; ++n) total += truncated_geometric_mass(n, n_max);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(truncated_geometric_mass(1, 1) == doctest::Approx(0.5));
    CHECK(truncated_geometric_mass(0, 12) == doctest::Approx(0.5));
    CHECK(truncated_geometric_mass(12, 12) == doctest::Approx(std::ldexp(1.0, -12)));
}

TEST_CASE("geometric level sampler matches its law") {
    const auto mdp = row_instance({1.0});
    GenerativeModel gm(mdp, 3);
    const int draws = 200000;
    std::vector<int> counts(8, 0);
    for (int i = 0; i < draws; ++i) {
        const int n = gm.sample_geometric_half();
        if (n < 8) ++counts[n];
    }
    for (int n = 0; n < 6; ++n) {
        const double p = std::ldexp(1.0, -(n + 1));
        const double freq = static_cast<double>(counts[n]) / draws;
        CHECK(std::abs(freq - p) <= 4.0 * std::sqrt(p * (1 - p) / draws));
    }
}

TEST_CASE("contamination estimator collapses on constant values") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 4);
    for (int i = 0; i < 50; ++i)
        CHECK(estimate_sigma_contamination(gm, 0, 0, {0.7, 0.7}, 0.3) ==
              doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("contamination estimator at radius 1 returns max V regardless of draws") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 5);
    for (int i = 0; i < 50; ++i)
        CHECK(estimate_sigma_contamination(gm, 0, 0, {0.2, 0.9}, 1.0) ==
              doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("contamination estimator is unbiased for the closed form") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 6);
    const numvec v{0.0, 1.0};
    const double exact = sigma_exact(Contamination{0.2}, {0.5, 0.5}, v).sigma;
    const int draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double x = estimate_sigma_contamination(gm, 0, 0, v, 0.2);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    CHECK(std::abs(mean - exact) <= 3.0 * se);
    CHECK(exact == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("mlmc estimator is exact on deterministic rows") {
    const auto mdp = row_instance({0.0, 1.0, 0.0});
    GenerativeModel gm(mdp, 7);
    const numvec v{0.1, 0.8, 0.4};
    const UncertaintyModel model = TotalVariation{0.2};
    const numvec point{0.0, 1.0, 0.0};
    const double expected = sigma_exact(model, point, v).sigma;
    // all empirical measures coincide, so the correction term is exactly 0
    for (int i = 0; i < 30; ++i)
        CHECK(estimate_sigma_mlmc(gm, 0, 0, v, model, MlmcConfig{}) ==
              doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("mlmc estimator stays well-defined at the truncation boundary") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 8);
    MlmcConfig cfg;
    cfg.n_max = 1;
    for (int i = 0; i < 200; ++i) {
        const double est = estimate_sigma_mlmc(gm, 0, 0, {0.0, 1.0},
                                               TotalVariation{0.2}, cfg);
        CHECK(std::isfinite(est));
    }
}

TEST_CASE("mlmc sample count per call is 2^(N'+1) with bounded expectation") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 9);
    MlmcConfig cfg;
    cfg.n_max = 6;
    const int calls = 20000;
    std::uint64_t before = gm.sample_count();
    double total = 0.0;
    for (int i = 0; i < calls; ++i) {
        estimate_sigma_mlmc(gm, 0, 0, {0.0, 1.0}, TotalVariation{0.2}, cfg);
        const std::uint64_t used = gm.sample_count() - before;
        before = gm.sample_count();
        // a power of two in [2, 2^(n_max+1)], and within the documented bound
        CHECK((used & (used - 1)) == 0);
        CHECK(used >= 2);
        CHECK(used <= (1ull << (cfg.n_max + 1)));
        CHECK(used <= 1ull + (1ull << (cfg.n_max + 1)));
        total += static_cast<double>(used);
    }
    CHECK(total / calls <= 1.0 + 2.0 * (cfg.n_max + 1));
}

TEST_CASE("mlmc estimator mean approaches the exact support function") {
    const auto mdp = row_instance({0.5, 0.5});
    const numvec v{0.0, 1.0};
    MlmcConfig cfg;
    cfg.n_max = 10;

    for (int which = 0; which < 2; ++which) {
        const UncertaintyModel model =
            which == 0 ? UncertaintyModel(TotalVariation{0.2})
                       : UncertaintyModel(Wasserstein{1.0, 0.2, line_metric(2)});
        GenerativeModel gm(mdp, 10 + which);
        const double exact = sigma_exact(model, {0.5, 0.5}, v).sigma;
        const int draws = 30000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double x = estimate_sigma_mlmc(gm, 0, 0, v, model, cfg);
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
        const double truncation_allowance = std::ldexp(1.0, -cfg.n_max);
        CHECK(std::abs(mean - exact) <= 3.0 * se + truncation_allowance);
    }
}

TEST_CASE("full estimator call sequences are deterministic under a fixed seed") {
    const auto mdp = row_instance({0.3, 0.3, 0.4});
    const numvec v{0.2, 0.9, 0.5};
    const UncertaintyModel model = TotalVariation{0.15};
    numvec first_run;
    for (int run = 0; run < 2; ++run) {
        GenerativeModel gm(mdp, 1234);
        numvec values;
        for (int i = 0; i < 500; ++i)
            values.push_back(estimate_sigma(gm, 0, 0, v, model, MlmcConfig{}));
        if (run == 0)
            first_run = values;
        else
            CHECK(values == first_run);
    }
}

TEST_CASE("mlmc rejects contamination models and bad configs") {
    const auto mdp = row_instance({0.5, 0.5});
    GenerativeModel gm(mdp, 11);
    CHECK_THROWS_AS(
        estimate_sigma_mlmc(gm, 0, 0, {0.0, 1.0}, Contamination{0.1}, MlmcConfig{}),
        ParamError);
    MlmcConfig bad;
    bad.geom_p = 0.4;
    CHECK_THROWS_AS(check_mlmc(bad), ParamError);
    bad = MlmcConfig{};
    bad.n_max = 0;
    CHECK_THROWS_AS(check_mlmc(bad), ParamError);
}
