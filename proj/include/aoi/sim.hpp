#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "aoi/types.hpp"
#include "aoi/wag.hpp"

namespace aoi::sim {

// ---------------------------------------------------------------------------
// Transmission policies
// ---------------------------------------------------------------------------

struct TwoStatePolicy {
    double r;
    double s;
};

struct WagPolicy {
    double r;
    int h;
};

/// Memoryless transmission with probability p each slot.
struct SlottedAlohaPolicy {
    double p;
};

/**
 * Age-threshold gating without feedback: a user may run the ALOHA coin only
 * once the slots elapsed since its own last transmission reach the threshold.
 * Elapsed counters start at the threshold, so users are initially eligible.
 */
struct AgeThresholdAlohaPolicy {
    double p;
    double threshold;
};

/// Fixed periodic binary schedules, one per active user. Offsets default to 0;
/// random per-run cyclic offsets can be enabled for sensitivity checks.
struct PreAssignedPolicy {
    std::vector<std::string> sequences;
    bool random_offsets = false;
};

using PolicySpec = std::variant<TwoStatePolicy, WagPolicy, SlottedAlohaPolicy,
                                AgeThresholdAlohaPolicy, PreAssignedPolicy>;

void validate(const PolicySpec& policy, const NetworkShape& shape);
std::string policy_name(const PolicySpec& policy);

/**
 * Load pre-assigned schedules: plain text, one line per active user, characters
 * '0'/'1', all lines the same length. A file with exactly N lines is reused
 * across clusters; otherwise it must supply all C*N rows.
 */
PreAssignedPolicy load_preassigned(const std::filesystem::path& file, const NetworkShape& shape,
                                   bool random_offsets = false);

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct SimConfig {
    NetworkShape shape;
    PolicySpec policy;
    long long slots = 10000;
    int runs = 100;
    std::uint64_t seed = 42;
    Objective objective{0.5, 1};
    int z_max = 3; // AoI powers tracked; must cover objective.z
};

void validate(const SimConfig& config);

/**
 * Statistics of one run (or the average over runs): empirical means of the
 * delivery/detection processes, empirical temporal variances, per-z time
 * averages of AoI^z (active values averaged over every active user), and the
 * empirical objective. Per-run temporal variances come from batch means; the
 * aggregate replaces them with the across-run estimator
 * sample variance of (sum_t S(t) - T m̄)/sqrt(T) under the pooled mean m̄.
 */
struct RunStats {
    double m_hat_a = 0.0;
    double m_hat_p = 0.0;
    double v2_hat_a = 0.0;
    double v2_hat_p = 0.0;
    std::vector<double> aoi_moments_a; // index z-1
    std::vector<double> aoi_moments_p;
    double f_hat = 0.0;
    std::vector<double> deliveries_per_user; // raw success counts, one per active user
};

struct SimResult {
    RunStats aggregate;
    std::vector<RunStats> per_run;
};

/// One fully deterministic run; user streams derive from (seed, run_index, user).
RunStats simulate_run(const SimConfig& config, int run_index);

/// All runs (parallelized when threads > 1) plus the deterministic aggregate.
SimResult simulate(const SimConfig& config, int threads = 1);

struct AlohaSweep {
    double p_star;
    double f_hat;
};

/// Simulates every p on the grid {p_step, 2 p_step, ...} < 1 and returns the
/// empirical argmin of the objective; ties break toward smaller p.
AlohaSweep sweep_optimal_aloha(const NetworkShape& shape, const Objective& obj, long long slots,
                               int runs, std::uint64_t seed, double p_step, int threads = 1);

struct WagSweep {
    wag::WagParams params;
    double f_hat;
    bool low_confidence; // per-cell simulated slots below a useful floor
};

/// Empirical grid search over r x H with per-cell budget (slots, runs);
/// the grid matches the analytic optimizer's. Ties break toward smaller H then r.
WagSweep sweep_wag_empirical(const NetworkShape& shape, const Objective& obj,
                             long long slots_per_run, int runs, std::uint64_t seed, double r_step,
                             int h_max, int threads = 1);

} // namespace aoi::sim
