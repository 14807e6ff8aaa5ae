#pragma once

#include <cstdint>
#include <vector>

#include "aoi/types.hpp"

namespace aoi::oracle {

/**
 * Per-user transmission chain for the reference computations: a row-stochastic
 * transition matrix plus a per-state "transmitting" indicator. All users run
 * independent copies of the same chain.
 */
struct ChainSpec {
    int states;
    std::vector<double> transition; // row-major, states x states
    std::vector<std::uint8_t> emit;

    double p(int i, int j) const { return transition[static_cast<std::size_t>(i) * states + j]; }
};

ChainSpec two_state_chain(double r, double s);
ChainSpec wag_chain(double r, int h);

/// Validates row sums (1e-12) and non-negativity; throws ParameterError.
void validate(const ChainSpec& chain);

/**
 * Stationary distribution by direct linear solve, with the defining residual
 * ||pi P - pi||_inf < 1e-12 asserted. Ergodicity is verified by repeated
 * squaring of the transition matrix (all rows must converge to pi); a chain
 * that fails to converge raises ErgodicityError.
 */
std::vector<double> stationary(const ChainSpec& chain);

struct ExactMeanVariance {
    double m_a;
    double v_a2;
    double m_p;
    double v_p2;
    bool tail_warning; // truncation tail estimate exceeded 1e-9
};

/**
 * Exact means and truncated CLT variances straight from matrix powers: the
 * lag-k delivery covariance uses the per-user k-step conditionals
 * Prob(emit at k+1 | emit at 1) and Prob(silent at k+1 | silent at 1)
 * raised to the (N-1) and CN powers. This is the arbiter for the closed-form
 * model variance expressions. Requires C*N <= 12.
 */
ExactMeanVariance exact_mean_variance(const ChainSpec& chain, const NetworkShape& shape,
                                      int k_trunc);

struct ExactAoiMoments {
    std::vector<double> active;  // E[AoI_a^z], z = 1..z_max
    std::vector<double> passive; // E[AoI_p^z], z = 1..z_max
    double tail_bound_active;    // residual mass x cap^z_max
    double tail_bound_passive;
    long long age_cap_used;
};

/**
 * Exact stationary AoI moments over the joint (users x age) chain, with ages
 * truncated at a cap that automatically extends until the reported tail bound
 * falls below 1e-8 (or AgeCapError if more than 1e-6 mass survives the hard
 * cap). Joint chains track per-state user counts rather than labeled tuples,
 * which keeps e.g. 8 users on a 6-state chain at a few thousand joint states.
 */
ExactAoiMoments exact_aoi_moments(const ChainSpec& chain, const NetworkShape& shape, int z_max,
                                  long long age_cap = 5000);

} // namespace aoi::oracle
