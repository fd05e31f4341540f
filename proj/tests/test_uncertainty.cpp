#include "rcmdp/uncertainty.hpp"
#include "rcmdp/errors.hpp"
#include "rcmdp/io.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rcmdp;

namespace {

UncertaintyModel make_model(int which, double radius, int n, std::mt19937_64* rng) {
    if (which == 0) return Contamination{radius};
    if (which == 1) return TotalVariation{radius};
    Wasserstein w{1.0, radius, line_metric(n)};
    if (rng) {
        // random symmetric metric with zero diagonal
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                w.metric[i][j] = w.metric[j][i] = 0.1 + testutil::unit(*rng);
    }
    return w;
}

} // namespace

TEST_CASE("span seminorm") {
    CHECK(span_seminorm({0.0, 1.0}) == 1.0);
    CHECK(span_seminorm({3.0, 3.0, 3.0}) == 0.0);
    CHECK(span_seminorm({-2.0, 3.0, 0.5}) == 5.0);
}

TEST_CASE("contamination support in closed form") {
    const auto res = sigma_exact(Contamination{0.2}, {0.5, 0.5}, {0.0, 1.0});
    CHECK(res.sigma == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(res.worst_row[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(res.worst_row[1] == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("total variation support moves mass onto the argmax state") {
    const auto res = sigma_exact(TotalVariation{0.2}, {0.5, 0.5}, {0.0, 1.0});
    CHECK(res.sigma == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(res.worst_row[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(res.worst_row[1] == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("wasserstein support on the 2-state line") {
    const Wasserstein model{1.0, 0.2, line_metric(2)};
    const auto res = sigma_exact(model, {0.5, 0.5}, {0.0, 1.0});
    CHECK(res.sigma == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(res.worst_row[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(res.worst_row[1] == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("radius 0 collapses every set to the nominal row") {
    std::mt19937_64 rng(500);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const auto row = testutil::random_simplex_row(rng, n);
        const auto v = testutil::random_values(rng, n);
        for (int which = 0; which < 3; ++which) {
            const auto model = make_model(which, 0.0, n, nullptr);
            const auto res = sigma_exact(model, row, v);
            CHECK(res.sigma == doctest::Approx(testutil::dot(row, v)).epsilon(1e-12));
        }
    }
}

TEST_CASE("constant V keeps the worst-case kernel nominal") {
    const auto mdp = testutil::load_fixture("chain3.json");
    const numvec v(3, 0.4);
    for (int which = 0; which < 3; ++which) {
        const auto model = make_model(which, 0.2, 3, nullptr);
        const auto kernel = worst_case_kernel(model, mdp, v);
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a)
                for (int t = 0; t < 3; ++t)
                    CHECK(kernel.trans[s][a][t] ==
                          doctest::Approx(mdp.nominal_kernel[s][a][t]).epsilon(1e-14));
    }
}

TEST_CASE("contamination worst-case kernel mixes nominal with the argmax vertex") {
    const auto mdp = testutil::load_fixture("chain3.json");
    const numvec v{0.1, 0.9, 0.3};
    const double radius = 0.25;
    const auto kernel = worst_case_kernel(Contamination{radius}, mdp, v);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            for (int t = 0; t < 3; ++t) {
                const double expected = (1.0 - radius) * mdp.nominal_kernel[s][a][t] +
                                        (t == 1 ? radius : 0.0);
                CHECK(kernel.trans[s][a][t] == doctest::Approx(expected).epsilon(1e-14));
            }
}

TEST_CASE("TV worst rows match the grid maximizer on random 4-state instances") {
    std::mt19937_64 rng(501);
    for (int trial = 0; trial < 8; ++trial) {
        const auto row = testutil::random_simplex_row(rng, 4);
        const auto v = testutil::random_values(rng, 4);
        const double radius = 0.05 + 0.3 * testutil::unit(rng);
        const auto res = sigma_exact(TotalVariation{radius}, row, v);
        const double brute = testutil::grid_support_maximizer(
            v, testutil::tv_member(row, radius), row, 100, 3);
        CHECK(std::abs(res.sigma - brute) <= 1e-3);
    }
}

TEST_CASE("sigma properties: translation, monotonicity, bounds, nonexpansiveness") {
    std::mt19937_64 rng(502);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const auto row = testutil::random_simplex_row(rng, n);
        const auto v = testutil::random_values(rng, n, -1.0, 1.0);
        const double radius = 0.05 + 0.4 * testutil::unit(rng);
        const double shift = 2.0 * testutil::unit(rng) - 1.0;

        for (int which = 0; which < 3; ++which) {
            const auto model = make_model(which, radius, n, &rng);

            const auto base = sigma_exact(model, row, v);

            // translation equivariance
            numvec shifted = v;
            for (double& x : shifted) x += shift;
            const auto translated = sigma_exact(model, row, shifted);
            CHECK(translated.sigma == doctest::Approx(base.sigma + shift).epsilon(1e-10));

            // monotonicity in V (elementwise increase)
            numvec larger = v;
            for (double& x : larger) x += 0.3 * testutil::unit(rng);
            CHECK(sigma_exact(model, row, larger).sigma >= base.sigma - 1e-12);

            // monotonicity in the radius
            const auto wider = sigma_exact(with_radius(model, radius * 1.5), row, v);
            CHECK(wider.sigma >= base.sigma - 1e-12);

            // bounds
            CHECK(base.sigma >= testutil::dot(row, v) - 1e-12);
            CHECK(base.sigma <= *std::max_element(v.begin(), v.end()) + 1e-12);

            // sup-norm nonexpansiveness
            numvec other = testutil::random_values(rng, n, -1.0, 1.0);
            double gap = 0.0;
            for (int i = 0; i < n; ++i) gap = std::max(gap, std::abs(v[i] - other[i]));
            const auto res_other = sigma_exact(model, row, other);
            CHECK(std::abs(base.sigma - res_other.sigma) <= gap + 1e-10);

            // the worst row achieves sigma and lies in the set
            CHECK(std::abs(testutil::dot(base.worst_row, v) - base.sigma) <= 1e-9);
            CHECK(set_membership_residual(model, row, base.worst_row) <= 1e-9);
        }
    }
}

TEST_CASE("wasserstein primal and dual routes agree") {
    std::mt19937_64 rng(503);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const auto row = testutil::random_simplex_row(rng, n);
        const auto v = testutil::random_values(rng, n);
        const double radius = 0.02 + 0.5 * testutil::unit(rng);
        Wasserstein model = std::get<Wasserstein>(make_model(2, radius, n, &rng));
        if (trial % 2 == 0) model.metric = line_metric(n);
        if (trial % 5 == 0) model.order = 2.0;

        const double primal = sigma_exact(model, row, v).sigma;
        const double dual = sigma_wasserstein_dual(model, row, v);
        CHECK(std::abs(primal - dual) <= 1e-7);
    }
}

TEST_CASE("TV ball equals the order-1 ball under the discrete metric") {
    std::mt19937_64 rng(504);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const auto row = testutil::random_simplex_row(rng, n);
        const auto v = testutil::random_values(rng, n);
        const double radius = 0.05 + 0.6 * testutil::unit(rng);
        const double tv = sigma_exact(TotalVariation{radius}, row, v).sigma;
        const double transport =
            sigma_exact(Wasserstein{1.0, radius, discrete_metric(n)}, row, v).sigma;
        CHECK(std::abs(tv - transport) <= 1e-8);
    }
}

TEST_CASE("transport cost agrees with the CDF form of W1 on the line") {
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        const auto p = testutil::random_simplex_row(rng, n);
        const auto q = testutil::random_simplex_row(rng, n);
        const double cost = transport_cost_pow(p, q, line_metric(n), 1.0);
        CHECK(cost == doctest::Approx(testutil::w1_line_distance(p, q)).epsilon(1e-9));
        CHECK(transport_cost_pow(p, p, line_metric(n), 1.0) <= 1e-12);
    }
}

TEST_CASE("model validation rejects bad parameters") {
    CHECK_THROWS_AS(check_model(Contamination{1.0}, 2), ParamError);
    CHECK_THROWS_AS(check_model(TotalVariation{1.5}, 2), ParamError);
    CHECK_THROWS_AS(check_model(Wasserstein{0.5, 0.1, line_metric(2)}, 2), ParamError);
    auto skewed = line_metric(2);
    skewed[0][1] = 2.0; // breaks symmetry
    CHECK_THROWS_AS(check_model(Wasserstein{1.0, 0.1, skewed}, 2), ParamError);
    CHECK_NOTHROW(check_model(TotalVariation{0.0}, 2));
}
