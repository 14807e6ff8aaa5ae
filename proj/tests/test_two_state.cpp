#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoi/markov_oracle.hpp"
#include "aoi/two_state.hpp"

using namespace aoi;
using namespace aoi::twostate;

TEST_CASE("parameterization: lambda/theta round trip and validation") {
    const auto lt = to_lambda_theta({0.25, 1.0});
    CHECK(lt.lambda == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(lt.theta == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK_THROWS_AS(to_lambda_theta({0.0, 0.0}), DegenerateProcessError);
    CHECK_THROWS_AS(to_lambda_theta({1.2, 0.5}), ParameterError);
    CHECK_THROWS_AS(from_lambda_theta({0.1, -0.5}), ParameterError); // below -lambda/(1-lambda)

    for (double r : {0.05, 0.3, 0.75, 1.0})
        for (double s : {0.1, 0.5, 0.9}) {
            const auto back = from_lambda_theta(to_lambda_theta({r, s}));
            CHECK(back.r == doctest::Approx(r).epsilon(1e-12));
            CHECK(back.s == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("conditional return probabilities satisfy their recursions") {
    for (double r : {0.05, 0.25, 0.6, 0.95}) {
        for (double s : {0.05, 0.4, 0.85}) {
            const auto lt = to_lambda_theta({r, s});
            double g = 1.0;
            double gbar = 1.0;
            CHECK(g_closed(lt, 1) == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(gbar_closed(lt, 1) == doctest::Approx(1.0).epsilon(1e-15));
            for (int k = 2; k <= 200; ++k) {
                g = r + lt.theta * g;
                gbar = s + lt.theta * gbar;
                CHECK(g_closed(lt, k) == doctest::Approx(g).epsilon(1e-12));
                CHECK(gbar_closed(lt, k) == doctest::Approx(gbar).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("means: fixed examples") {
    const auto m1 = two_state_means({0.5, 0.0}, {1, 1});
    CHECK(m1.active == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m1.passive == doctest::Approx(0.5).epsilon(1e-15));
    const auto m2 = two_state_means({0.2, -0.25}, {1, 2});
    CHECK(m2.active == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(m2.passive == doctest::Approx(0.64).epsilon(1e-15));
}

TEST_CASE("means: lambda = 1/8 with N = 8 against the stationary reference") {
    const auto params = from_lambda_theta({0.125, 0.0});
    const auto chain = oracle::two_state_chain(params.r, params.s);
    const auto exact = oracle::exact_mean_variance(chain, {1, 8}, 10);
    const auto means = two_state_means({0.125, 0.0}, {1, 8});
    CHECK(means.active == doctest::Approx(exact.m_a).epsilon(1e-14));
    CHECK(means.active == doctest::Approx(0.04909).epsilon(1e-3));
}

TEST_CASE("variances: theta = 0 is i.i.d. Bernoulli") {
    for (double lambda : {0.1, 0.35, 0.8}) {
        for (const NetworkShape shape : {NetworkShape{1, 1}, NetworkShape{2, 3}}) {
            const auto means = two_state_means({lambda, 0.0}, shape);
            const auto vars = two_state_variances({lambda, 0.0}, shape, 1000);
            CHECK(vars.active == doctest::Approx(means.active * (1 - means.active)).epsilon(1e-15));
            CHECK(vars.passive ==
                  doctest::Approx(means.passive * (1 - means.passive)).epsilon(1e-15));
        }
    }
}

TEST_CASE("variances: N = 1 closed form lambda(1-lambda)(1+theta)/(1-theta)") {
    for (double lambda : {0.2, 0.5}) {
        for (double theta : {-0.2, 0.0, 0.4}) {
            if (theta < -lambda / (1 - lambda)) continue;
            const auto vars = two_state_variances({lambda, theta}, {1, 1}, 4000);
            const double closed = lambda * (1 - lambda) * (1 + theta) / (1 - theta);
            CHECK(vars.active == doctest::Approx(closed).epsilon(1e-10));
        }
    }
}

TEST_CASE("variances: autocovariance reference agreement") {
    for (const auto& [lambda, theta, shape] :
         std::vector<std::tuple<double, double, NetworkShape>>{
             {0.5, -0.5, NetworkShape{1, 1}},
             {0.2, -0.25, NetworkShape{1, 2}},
             {0.3, 0.2, NetworkShape{2, 2}}}) {
        const auto params = from_lambda_theta({lambda, theta});
        const auto chain = oracle::two_state_chain(params.r, params.s);
        const auto exact = oracle::exact_mean_variance(chain, shape, 1000);
        const auto vars = two_state_variances({lambda, theta}, shape, 1000);
        CHECK(vars.active == doctest::Approx(exact.v_a2).epsilon(1e-10));
        CHECK(vars.passive == doctest::Approx(exact.v_p2).epsilon(1e-10));
    }
}

TEST_CASE("variances: degenerate chains are rejected") {
    CHECK_THROWS_AS(two_state_variances({0.5, 1.0}, {1, 1}, 1000), DegenerateProcessError);
    CHECK_THROWS_AS(two_state_variances({0.5, -1.0}, {1, 1}, 1000), ParameterError);
    CHECK_THROWS_AS(two_state_variances({0.5, 0.0}, {1, 1}, 0), ParameterError);
}

TEST_CASE("variances: truncation tail is negligible by k_trunc = 1000") {
    for (double theta : {-0.9, 0.9}) {
        const double lambda = 0.5;
        const auto v1 = two_state_variances({lambda, theta}, {1, 2}, 1000);
        const auto v2 = two_state_variances({lambda, theta}, {1, 2}, 2000);
        CHECK(std::abs(v1.active - v2.active) < 1e-8);
        CHECK(std::abs(v1.passive - v2.passive) < 1e-8);
    }
}

TEST_CASE("moments: perpetual collision is degenerate") {
    CHECK_THROWS_AS(two_state_moments({1.0, 0.0}, {1, 2}, {1.0, 1}, 1000),
                    DegenerateProcessError);
}

TEST_CASE("moments: composition matches the printed z = 1 closed form") {
    const auto summary = two_state_moments({0.25, 1.0}, {1, 1}, {1.0, 1}, 1000);
    const auto means = two_state_means({0.2, -0.25}, {1, 1});
    const auto vars = two_state_variances({0.2, -0.25}, {1, 1}, 1000);
    const double expected =
        0.5 * (vars.active / (means.active * means.active) + 1.0 / means.active) + 0.5;
    CHECK(summary.aoi_active == doctest::Approx(expected).epsilon(1e-12));
    CHECK(summary.objective_value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::isnan(summary.aoi_passive));
}

TEST_CASE("moments: slotted-ALOHA composition (theta = 0)") {
    // r = 1/N, s = 1 - 1/N is i.i.d. transmission with probability 1/N.
    const int n = 8;
    const auto summary = two_state_moments({1.0 / n, 1.0 - 1.0 / n}, {1, n}, {1.0, 1}, 1000);
    const double m = (1.0 / n) * std::pow(1.0 - 1.0 / n, n - 1);
    const double expected = 0.5 * ((1 - m) / m + 1.0 / m) + 0.5;
    CHECK(summary.aoi_active == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("optimizer: boundary and trivial objectives") {
    // N = 1, w = 1: no collisions, larger lambda always helps; the grid is
    // capped by r <= 1 (lambda <= 1/2) and the feasible boundary wins.
    const auto best = optimize_two_state({1, 1}, {1.0, 1}, 0.01, 1000);
    CHECK(best.params.s == 1.0);
    CHECK(best.params.r >= 0.9);

    // w = 0: the passive user wants silence, so the smallest grid point wins.
    const auto quiet = optimize_two_state({1, 4}, {0.0, 1}, 0.01, 1000);
    CHECK(quiet.params.r == doctest::Approx(0.01 / 0.99).epsilon(1e-12));
}

TEST_CASE("optimizer: s = 1 row contains the coarse 2-D grid minimum (N = 8)") {
    const NetworkShape shape{1, 8};
    const Objective obj{1.0, 1};
    const auto best = optimize_two_state(shape, obj, 0.01, 1000);
    const auto lt = to_lambda_theta(best.params);
    CHECK(best.params.s == 1.0);
    CHECK(lt.lambda <= 1.0 / 8 + 1e-12);
    CHECK(lt.lambda == doctest::Approx(0.125).epsilon(0.2));

    double grid_min = std::numeric_limits<double>::infinity();
    for (double r = 0.02; r <= 0.30001; r += 0.02) {
        for (double s : {0.2, 0.4, 0.6, 0.8, 1.0}) {
            try {
                grid_min = std::min(
                    grid_min, two_state_moments({r, s}, shape, obj, 1000).objective_value);
            } catch (const DegenerateProcessError&) {
            }
        }
    }
    CHECK(best.objective_value <= grid_min + 1e-9);
}

TEST_CASE("cubic roots: endpoints, bounds, residuals") {
    for (int n : {1, 5, 10, 50, 200}) CHECK(h_poly(n, 0.0) == doctest::Approx(1.0));

    const auto row5 = cubic_roots({1, 5});
    CHECK(row5.alpha > 0.2);
    CHECK(row5.beta > 0.2);

    const auto row10 = cubic_roots({1, 10});
    CHECK(std::abs(h_poly(10, row10.alpha)) < 1e-12);
    CHECK(std::abs(hbar_poly(10, row10.beta)) < 1e-12);
    CHECK(row10.alpha > 0.0);
    CHECK(row10.alpha < 1.0);
}

TEST_CASE("cubic roots: dense sign scan confirms a unique root in (0, 1)") {
    for (int c : {1, 2}) {
        for (int n : {3, 7, 10, 40}) {
            const auto roots = cubic_roots({c, n});
            int alpha_changes = 0;
            int beta_changes = 0;
            const int cells = 999;
            for (int i = 0; i < cells; ++i) {
                const double y0 = (i + 0.001) / cells;
                const double y1 = (i + 1.001) / cells;
                if (h_poly(n, y0) * h_poly(n, y1) < 0) {
                    ++alpha_changes;
                    CHECK(roots.alpha >= y0);
                    CHECK(roots.alpha <= y1);
                }
                if (hbar_poly(c * n, y0) * hbar_poly(c * n, y1) < 0) {
                    ++beta_changes;
                    CHECK(roots.beta >= y0);
                    CHECK(roots.beta <= y1);
                }
            }
            CHECK(alpha_changes == 1);
            CHECK(beta_changes == 1);
        }
    }
}

TEST_CASE("lemma checks: structural claims pass on the default grid") {
    LemmaGrid grid;
    grid.lambdas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    grid.thetas = {-0.4, -0.2, -0.05, 0.0, 0.1, 0.3, 0.5};
    const auto report = lemma_checks({1, 6}, {0.5, 2}, grid);
    CHECK(report.positive_theta_never_helps);
    CHECK(report.lambda_monotone_above_inverse_n);
    CHECK(report.alpha_exceeds_inverse_n);
    CHECK(report.beta_exceeds_inverse_n);
    CHECK(report.all_passed());

    // N = 100: the alpha bound comfortably clears 1/N.
    CHECK(cubic_roots({1, 100}).alpha > 0.01);
}
