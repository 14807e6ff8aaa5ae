#pragma once

#include <vector>

#include "aoi/second_order.hpp"
#include "aoi/types.hpp"

namespace aoi::twostate {

/// Idle -> TX probability r, TX -> Idle probability s. Requires r + s > 0.
struct TwoStateParams {
    double r;
    double s;
};

/// Reparameterization lambda = r/(r+s) (stationary TX probability) and
/// theta = 1 - r - s (second eigenvalue of the transition matrix).
struct LambdaTheta {
    double lambda;
    double theta;
};

void validate(const TwoStateParams& params);
void validate(const LambdaTheta& lt);

LambdaTheta to_lambda_theta(const TwoStateParams& params);
/// Inverse map r = lambda(1-theta), s = (1-lambda)(1-theta).
TwoStateParams from_lambda_theta(const LambdaTheta& lt);

/// G(k) = Prob(TX at slot k | TX at slot 1) = lambda + (1-lambda) theta^{k-1}.
double g_closed(const LambdaTheta& lt, int k);
/// Gbar(k) = Prob(idle at slot k | idle at slot 1) = 1 - lambda + lambda theta^{k-1}.
double gbar_closed(const LambdaTheta& lt, int k);

/// m_a = lambda (1-lambda)^{N-1},  m_p = (1-lambda)^{CN}.
ActivePassive two_state_means(const LambdaTheta& lt, const NetworkShape& shape);

/**
 * Temporal variances from the Markov central limit theorem, truncated at
 * k_trunc lag terms:
 *
 *   v_a^2 = m_a - m_a^2
 *           + 2 sum_k ((lambda + (1-lambda) theta^k)(1 - lambda + lambda theta^k)^{N-1} - m_a) m_a
 *
 * and the passive analogue with exponent CN. Requires |theta| < 1. Truncation
 * noise can leave a tiny negative value; anything in [-1e-9, 0) is clamped to 0.
 */
ActivePassive two_state_variances(const LambdaTheta& lt, const NetworkShape& shape, int k_trunc);

/// Full pipeline: params -> (means, variances) -> z-th AoI moment roots and objective.
AoiSummary two_state_moments(const TwoStateParams& params, const NetworkShape& shape,
                             const Objective& obj, int k_trunc);

struct TwoStateOptimum {
    TwoStateParams params; // always has s = 1
    double objective_value;
};

/**
 * Line search of Theorem-justified form: fixes s = 1 and sweeps lambda over
 * {r_step, 2 r_step, ...} up to min(1/N, 1/2) (s = 1 bounds lambda = r/(r+1)
 * by 1/2), mapping each grid point to r = lambda/(1-lambda). Ties break
 * toward smaller r. Grid points with a degenerate weighted side are skipped.
 */
TwoStateOptimum optimize_two_state(const NetworkShape& shape, const Objective& obj, double r_step,
                                   int k_trunc);

/// h_N(y) = -(N+8) y^3 - (N-13) y^2 - 6y + 1.
double h_poly(int n, double y);
/// hbar_CN(y) = (CN-10) y^3 - (CN-13) y^2 - 6y + 1.
double hbar_poly(int cn, double y);

/// Smallest positive roots of h_N and hbar_CN, each the unique root in (0, 1).
struct CubicRootsReport {
    double alpha;
    double beta;
};

/// Bisection on [0,1]; asserts the sign change and a residual < 1e-12.
CubicRootsReport cubic_roots(const NetworkShape& shape);

struct LemmaGrid {
    std::vector<double> lambdas;
    std::vector<double> thetas;
};

/// Numeric verification of the structural claims behind the s = 1 optimum.
struct LemmaReport {
    // (a) for fixed lambda, F at theta > 0 is >= F at theta = 0
    bool positive_theta_never_helps;
    double worst_positive_theta_margin; // min over grid of F(theta>0) - F(0)
    // (b) for fixed theta <= 0, F non-decreasing in lambda beyond 1/N
    bool lambda_monotone_above_inverse_n;
    double worst_lambda_monotonicity_margin;
    // (c) cubic-root lower bounds: alpha > 1/N (N in [5,200]),
    //     beta > 1/N (C in [1,8], C+4 < N <= 200)
    bool alpha_exceeds_inverse_n;
    double worst_alpha_margin;
    bool beta_exceeds_inverse_n;
    double worst_beta_margin;

    bool all_passed() const {
        return positive_theta_never_helps && lambda_monotone_above_inverse_n &&
               alpha_exceeds_inverse_n && beta_exceeds_inverse_n;
    }
};

LemmaReport lemma_checks(const NetworkShape& shape, const Objective& obj, const LemmaGrid& grid);

} // namespace aoi::twostate
