#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aoi/sim.hpp"
#include "aoi/two_state.hpp"
#include "aoi/wag.hpp"

using namespace aoi;
using namespace aoi::sim;

namespace {

bool stats_equal(const RunStats& a, const RunStats& b) {
    return a.m_hat_a == b.m_hat_a && a.m_hat_p == b.m_hat_p && a.v2_hat_a == b.v2_hat_a &&
           a.v2_hat_p == b.v2_hat_p && a.aoi_moments_a == b.aoi_moments_a &&
           a.aoi_moments_p == b.aoi_moments_p && a.f_hat == b.f_hat &&
           a.deliveries_per_user == b.deliveries_per_user;
}

std::filesystem::path write_temp_sequences(const std::string& name,
                                           const std::vector<std::string>& rows) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    for (const auto& row : rows) out << row << '\n';
    return path;
}

} // namespace

TEST_CASE("determinism: identical configs give identical results") {
    SimConfig config{{2, 3}, WagPolicy{0.3, 2}, 3000, 7, 1234, {0.5, 2}, 3};
    const SimResult a = simulate(config, 1);
    const SimResult b = simulate(config, 1);
    CHECK(stats_equal(a.aggregate, b.aggregate));
    REQUIRE(a.per_run.size() == b.per_run.size());
    for (std::size_t i = 0; i < a.per_run.size(); ++i)
        CHECK(stats_equal(a.per_run[i], b.per_run[i]));

    // Thread count must not change anything.
    const SimResult c = simulate(config, 4);
    CHECK(stats_equal(a.aggregate, c.aggregate));
}

TEST_CASE("always-transmitting single user: AoI pinned at 1, passive starved") {
    SimConfig config{{1, 1}, TwoStatePolicy{1.0, 0.0}, 500, 2, 9, {1.0, 1}, 3};
    const RunStats stats = simulate(config, 1).aggregate;
    for (int z = 0; z < 3; ++z)
        CHECK(stats.aoi_moments_a[static_cast<std::size_t>(z)] == doctest::Approx(1.0));
    CHECK(stats.m_hat_a == doctest::Approx(1.0));
    CHECK(stats.m_hat_p == doctest::Approx(0.0));
    // Passive AoI grows linearly: time-average of AoI over T slots is (T+1)/2.
    CHECK(stats.aoi_moments_p[0] == doctest::Approx(0.5 * (500 + 1)).epsilon(1e-12));
}

TEST_CASE("round-robin schedule: exact rate, zero temporal variance, silent passive") {
    PreAssignedPolicy policy;
    policy.sequences = {"1000", "0100", "0010", "0001"};
    SimConfig config{{1, 4}, policy, 4000, 3, 77, {1.0, 1}, 3};
    const RunStats stats = simulate(config, 1).aggregate;
    CHECK(stats.m_hat_a == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(stats.v2_hat_a == doctest::Approx(0.0));
    CHECK(stats.m_hat_p == doctest::Approx(0.0));
    // Every user's AoI cycles 1,2,3,4.
    CHECK(stats.aoi_moments_a[0] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("complementary processes when C = N = 1") {
    SimConfig config{{1, 1}, TwoStatePolicy{0.3, 0.6}, 5000, 3, 4321, {0.5, 1}, 3};
    const RunStats stats = simulate(config, 1).aggregate;
    CHECK(stats.m_hat_a + stats.m_hat_p == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-state empirical mean within three standard errors") {
    const double r = 0.25;
    SimConfig config{{1, 2}, TwoStatePolicy{r, 1.0}, 100000, 100, 42, {1.0, 1}, 3};
    const RunStats stats = simulate(config, 2).aggregate;
    const auto lt = twostate::to_lambda_theta({r, 1.0});
    const auto means = twostate::two_state_means(lt, {1, 2});
    const auto vars = twostate::two_state_variances(lt, {1, 2}, 1000);
    const double sigma = std::sqrt(vars.active / (100.0 * 100000.0));
    CHECK(std::abs(stats.m_hat_a - means.active) <= 3 * sigma);
    CHECK(stats.v2_hat_a == doctest::Approx(vars.active).epsilon(0.4));
}

TEST_CASE("slotted ALOHA empirical mean and variance match i.i.d. closed forms") {
    SimConfig config{{1, 8}, SlottedAlohaPolicy{0.125}, 10000, 100, 42, {1.0, 1}, 3};
    const RunStats stats = simulate(config, 2).aggregate;
    const double m = 0.125 * std::pow(0.875, 7);
    const double v2 = m * (1 - m);
    CHECK(std::abs(stats.m_hat_a - m) <= 3 * std::sqrt(v2 / (100.0 * 10000.0)));
    CHECK(stats.v2_hat_a == doctest::Approx(v2).epsilon(0.4));
}

TEST_CASE("WaG empirical mean within five standard errors") {
    SimConfig config{{2, 4}, WagPolicy{0.3, 3}, 20000, 50, 2024, {0.5, 1}, 3};
    const RunStats stats = simulate(config, 2).aggregate;
    const auto means = wag::wag_means({0.3, 3}, {2, 4});
    const auto vars = wag::wag_variances({0.3, 3}, {2, 4}, 1000);
    CHECK(std::abs(stats.m_hat_a - means.active) <=
          5 * std::sqrt(vars.active / (50.0 * 20000.0)));
    CHECK(std::abs(stats.m_hat_p - means.passive) <=
          5 * std::sqrt(vars.passive / (50.0 * 20000.0)));
}

TEST_CASE("per-user symmetry within a cluster") {
    SimConfig config{{1, 4}, TwoStatePolicy{0.1, 0.9}, 50000, 20, 5, {1.0, 1}, 3};
    const SimResult result = simulate(config, 2);
    const auto means = twostate::two_state_means(twostate::to_lambda_theta({0.1, 0.9}), {1, 4});
    const auto vars = twostate::two_state_variances(twostate::to_lambda_theta({0.1, 0.9}),
                                                    {1, 4}, 1000);
    const double sigma = std::sqrt(vars.active / (20.0 * 50000.0));
    for (double per_user : result.aggregate.deliveries_per_user)
        CHECK(std::abs(per_user / 50000.0 - means.active) <= 5 * sigma);
}

TEST_CASE("age-threshold gating with p = 1 transmits every threshold-th slot") {
    SimConfig config{{1, 1}, AgeThresholdAlohaPolicy{1.0, 3.0}, 9999, 1, 11, {1.0, 1}, 3};
    const RunStats stats = simulate_run(config, 0);
    CHECK(stats.m_hat_a == doctest::Approx(1.0 / 3).epsilon(1e-3));
}

TEST_CASE("sequence files: loading, reuse across clusters, validation") {
    const auto good = write_temp_sequences("aoi_seq_good.txt", {"10", "01"});
    const auto policy = load_preassigned(good, {2, 2});
    CHECK(policy.sequences.size() == 2); // N rows, reused per cluster
    SimConfig config{{2, 2}, policy, 1000, 2, 3, {0.5, 1}, 3};
    const RunStats stats = simulate(config, 1).aggregate;
    CHECK(stats.m_hat_a == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats.m_hat_p == doctest::Approx(0.0)); // always one transmitter per cluster

    const auto ragged = write_temp_sequences("aoi_seq_ragged.txt", {"10", "011"});
    CHECK_THROWS_AS(load_preassigned(ragged, {2, 2}), ParameterError);
    const auto bad_chars = write_temp_sequences("aoi_seq_chars.txt", {"10", "0x"});
    CHECK_THROWS_AS(load_preassigned(bad_chars, {2, 2}), ParameterError);
    const auto wrong_count = write_temp_sequences("aoi_seq_count.txt", {"10", "01", "11"});
    CHECK_THROWS_AS(load_preassigned(wrong_count, {2, 2}), ParameterError);
    CHECK_THROWS_AS(load_preassigned("/nonexistent/path/seq.txt", {2, 2}), IoError);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(validate(SimConfig{{1, 1}, TwoStatePolicy{0.0, 0.0}, 100, 1, 1, {0.5, 1}, 3}),
                    ParameterError);
    CHECK_THROWS_AS(validate(SimConfig{{1, 1}, TwoStatePolicy{0.5, 0.5}, 0, 1, 1, {0.5, 1}, 3}),
                    ParameterError);
    CHECK_THROWS_AS(validate(SimConfig{{1, 1}, TwoStatePolicy{0.5, 0.5}, 100, 1, 1, {0.5, 4}, 3}),
                    ParameterError);
    CHECK_THROWS_AS(validate(SimConfig{{1, 1}, SlottedAlohaPolicy{0.0}, 100, 1, 1, {0.5, 1}, 3}),
                    ParameterError);
}

TEST_CASE("ALOHA probability sweep: boundary and loaded-cluster behavior") {
    // No collisions with a single user: transmitting more always helps.
    const auto solo = sweep_optimal_aloha({1, 1}, {1.0, 1}, 2000, 5, 99, 0.1, 2);
    CHECK(solo.p_star == doctest::Approx(0.9).epsilon(1e-12));

    // Loaded cluster, active-only objective: optimum near 1/N.
    const auto loaded = sweep_optimal_aloha({1, 8}, {1.0, 1}, 5000, 20, 99, 0.02, 2);
    CHECK(loaded.p_star > 0.05);
    CHECK(loaded.p_star < 0.22);

    // Passive weight pushes strictly below 1/N.
    const auto weighted = sweep_optimal_aloha({4, 8}, {0.5, 1}, 5000, 20, 99, 0.02, 2);
    CHECK(weighted.p_star < 0.125);
}

TEST_CASE("WaG empirical sweep flags starvation budgets") {
    const auto starved = sweep_wag_empirical({1, 2}, {0.5, 1}, 1, 1, 7, 0.25, 2, 2);
    CHECK(starved.low_confidence);
    CHECK(starved.params.h >= 1);
    const auto fed = sweep_wag_empirical({1, 2}, {0.5, 1}, 2000, 2, 7, 0.25, 2, 2);
    CHECK_FALSE(fed.low_confidence);
    CHECK(std::isfinite(fed.f_hat));
}
