#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoi/markov_oracle.hpp"
#include "aoi/two_state.hpp"

using namespace aoi;
using namespace aoi::oracle;

namespace {

/**
 * Labeled-tuple reference for the exact AoI moments: enumerates all
 * states^users joint states directly. Exponential in the user count, so only
 * usable for C*N <= 4; cross-checks the count-symmetrized construction.
 */
std::vector<double> labeled_aoi_moments(const ChainSpec& chain, const NetworkShape& shape,
                                        int z_max, bool active, long long cap) {
    const int users = shape.clusters * shape.users_per_cluster;
    const int s = chain.states;
    long long total = 1;
    for (int u = 0; u < users; ++u) total *= s;
    const std::vector<double> pi = stationary(chain);

    std::vector<int> decode(static_cast<std::size_t>(users));
    auto state_of = [&](long long idx, int user) {
        for (int u = 0; u < users; ++u) {
            decode[static_cast<std::size_t>(u)] = static_cast<int>(idx % s);
            idx /= s;
        }
        return decode[static_cast<std::size_t>(user)];
    };
    auto success = [&](long long idx) {
        int cluster_tx = 0;
        int total_tx = 0;
        for (int u = 0; u < users; ++u) {
            const int st = state_of(idx, u);
            if (chain.emit[static_cast<std::size_t>(st)]) {
                ++total_tx;
                if (u < shape.users_per_cluster) ++cluster_tx;
            }
        }
        if (active) return chain.emit[static_cast<std::size_t>(state_of(idx, 0))] && cluster_tx == 1;
        return total_tx == 0;
    };

    std::vector<double> nu(static_cast<std::size_t>(total), 0.0);
    for (long long idx = 0; idx < total; ++idx) {
        double p = 1.0;
        for (int u = 0; u < users; ++u) p *= pi[static_cast<std::size_t>(state_of(idx, u))];
        if (success(idx)) nu[static_cast<std::size_t>(idx)] = p;
    }

    std::vector<double> moments(static_cast<std::size_t>(z_max), 0.0);
    std::vector<double> next(static_cast<std::size_t>(total));
    for (long long age = 1; age <= cap; ++age) {
        double mass = 0.0;
        for (double x : nu) mass += x;
        double power = 1.0;
        for (int z = 1; z <= z_max; ++z) {
            power *= static_cast<double>(age);
            moments[static_cast<std::size_t>(z - 1)] += power * mass;
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (long long idx = 0; idx < total; ++idx) {
            const double p0 = nu[static_cast<std::size_t>(idx)];
            if (p0 == 0.0) continue;
            // distribute over all joint successors
            std::vector<long long> stack{0};
            std::vector<double> prob{p0};
            for (int u = 0; u < users; ++u) {
                std::vector<long long> new_stack;
                std::vector<double> new_prob;
                const int st = state_of(idx, u);
                long long mult = 1;
                for (int v = 0; v < u; ++v) mult *= s;
                for (std::size_t b = 0; b < stack.size(); ++b)
                    for (int to = 0; to < s; ++to) {
                        const double p = chain.p(st, to);
                        if (p == 0.0) continue;
                        new_stack.push_back(stack[b] + mult * to);
                        new_prob.push_back(prob[b] * p);
                    }
                stack.swap(new_stack);
                prob.swap(new_prob);
            }
            for (std::size_t b = 0; b < stack.size(); ++b)
                if (!success(stack[b]))
                    next[static_cast<std::size_t>(stack[b])] += prob[b];
        }
        nu.swap(next);
    }
    return moments;
}

} // namespace

TEST_CASE("chain validation") {
    CHECK_THROWS_AS(validate(ChainSpec{2, {0.5, 0.4, 0.5, 0.5}, {0, 1}}), ParameterError);
    CHECK_THROWS_AS(validate(ChainSpec{2, {0.5, 0.5, -0.1, 1.1}, {0, 1}}), ParameterError);
    CHECK_THROWS_AS(validate(ChainSpec{2, {1.0, 0.0}, {0, 1}}), ParameterError);
}

TEST_CASE("stationary: two-state and WaG closed forms") {
    const auto pi_ts = stationary(two_state_chain(0.25, 1.0));
    CHECK(pi_ts[1] == doctest::Approx(0.2).epsilon(1e-13));

    const auto pi_wag = stationary(wag_chain(0.5, 2));
    CHECK(pi_wag[1] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(pi_wag[0] == doctest::Approx(0.4).epsilon(1e-13));
}

TEST_CASE("stationary: random ergodic chain satisfies pi P = pi") {
    // Fixed 5-state row-stochastic matrix with full support.
    ChainSpec chain{5, {}, {0, 1, 0, 1, 0}};
    const double raw[5][5] = {{0.2, 0.3, 0.1, 0.25, 0.15},
                              {0.05, 0.5, 0.2, 0.1, 0.15},
                              {0.3, 0.1, 0.3, 0.2, 0.1},
                              {0.25, 0.25, 0.25, 0.15, 0.1},
                              {0.1, 0.2, 0.3, 0.15, 0.25}};
    for (auto& row : raw)
        for (double v : row) chain.transition.push_back(v);
    const auto pi = stationary(chain);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) {
        double col = 0.0;
        for (int i = 0; i < 5; ++i) col += pi[static_cast<std::size_t>(i)] * chain.p(i, j);
        CHECK(std::abs(col - pi[static_cast<std::size_t>(j)]) < 1e-12);
        sum += pi[static_cast<std::size_t>(j)];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("stationary: non-ergodic chains are rejected") {
    // Period-2 chain.
    CHECK_THROWS_AS(stationary(two_state_chain(1.0, 1.0)), ErgodicityError);
    // Two absorbing states (reducible).
    CHECK_THROWS_AS(stationary(ChainSpec{2, {1.0, 0.0, 0.0, 1.0}, {0, 1}}), ErgodicityError);
}

TEST_CASE("stationary: unichain with a transient state is accepted") {
    // Idle is transient when r = 1, s = 0; the chain still converges to TX.
    const auto pi = stationary(two_state_chain(1.0, 0.0));
    CHECK(pi[0] == doctest::Approx(0.0));
    CHECK(pi[1] == doctest::Approx(1.0));
}

TEST_CASE("exact mean/variance: i.i.d. and collision-free identities") {
    // theta = 0: v^2 = m (1 - m).
    const auto iid = exact_mean_variance(two_state_chain(0.3, 0.7), {1, 2}, 1000);
    CHECK(iid.v_a2 == doctest::Approx(iid.m_a * (1 - iid.m_a)).epsilon(1e-12));
    CHECK(iid.v_p2 == doctest::Approx(iid.m_p * (1 - iid.m_p)).epsilon(1e-12));

    // N = 1: the delivery mean is the stationary TX probability exactly.
    const auto solo = exact_mean_variance(wag_chain(0.4, 2), {1, 1}, 1000);
    CHECK(solo.m_a == doctest::Approx(stationary(wag_chain(0.4, 2))[1]).epsilon(1e-14));

    CHECK_THROWS_AS(exact_mean_variance(two_state_chain(0.3, 0.7), {4, 4}, 100), ParameterError);
}

TEST_CASE("exact mean/variance: agrees with the closed-form model") {
    const auto params = twostate::from_lambda_theta({0.2, -0.25});
    const auto exact = exact_mean_variance(two_state_chain(params.r, params.s), {1, 2}, 1000);
    const auto means = twostate::two_state_means({0.2, -0.25}, {1, 2});
    const auto vars = twostate::two_state_variances({0.2, -0.25}, {1, 2}, 1000);
    CHECK(exact.m_a == doctest::Approx(means.active).epsilon(1e-12));
    CHECK(exact.v_a2 == doctest::Approx(vars.active).epsilon(1e-10));
    CHECK_FALSE(exact.tail_warning);
}

TEST_CASE("exact AoI moments: deterministic and geometric references") {
    // Always-transmitting single user: AoI identically 1.
    const auto det = exact_aoi_moments(two_state_chain(1.0, 0.0), {1, 1}, 3);
    for (int z = 1; z <= 3; ++z)
        CHECK(det.active[static_cast<std::size_t>(z - 1)] == doctest::Approx(1.0).epsilon(1e-12));

    // Slotted ALOHA with N = 1, p = 1/2: AoI is geometric, E[AoI] = 2.
    const auto geo = exact_aoi_moments(two_state_chain(0.5, 0.5), {1, 1}, 2);
    CHECK(geo.active[0] == doctest::Approx(2.0).epsilon(1e-10));
    // E[A^2] for geometric(1/2): (2 - p)/p^2 = 6.
    CHECK(geo.active[1] == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("exact AoI moments: basic shape invariants") {
    const auto res = exact_aoi_moments(wag_chain(0.3, 2), {1, 2}, 3);
    CHECK(res.active[0] >= 1.0);
    CHECK(res.passive[0] >= 1.0);
    CHECK(res.active[0] <= res.active[1]);
    CHECK(res.active[1] <= res.active[2]);
    CHECK(res.tail_bound_active < 1e-8);
    CHECK(res.tail_bound_passive < 1e-8);

    // Doubling the cap moves the moments by less than the reported bound.
    const auto res2 = exact_aoi_moments(wag_chain(0.3, 2), {1, 2}, 3, 10000);
    for (int z = 0; z < 3; ++z)
        CHECK(std::abs(res.active[static_cast<std::size_t>(z)] -
                       res2.active[static_cast<std::size_t>(z)]) <=
              std::max(res.tail_bound_active, 1e-10));
}

TEST_CASE("exact AoI moments: count construction equals the labeled construction") {
    for (const auto& [chain, shape] : std::vector<std::pair<ChainSpec, NetworkShape>>{
             {wag_chain(0.3, 1), NetworkShape{1, 3}},
             {two_state_chain(0.3, 0.7), NetworkShape{2, 2}},
             {wag_chain(0.5, 2), NetworkShape{1, 2}}}) {
        const auto counted = exact_aoi_moments(chain, shape, 2);
        const auto labeled_a = labeled_aoi_moments(chain, shape, 2, true, 4000);
        const auto labeled_p = labeled_aoi_moments(chain, shape, 2, false, 4000);
        for (int z = 0; z < 2; ++z) {
            CHECK(counted.active[static_cast<std::size_t>(z)] ==
                  doctest::Approx(labeled_a[static_cast<std::size_t>(z)]).epsilon(1e-9));
            CHECK(counted.passive[static_cast<std::size_t>(z)] ==
                  doctest::Approx(labeled_p[static_cast<std::size_t>(z)]).epsilon(1e-9));
        }
    }
}
