#pragma once

#include <vector>

#include "aoi/second_order.hpp"
#include "aoi/types.hpp"

namespace aoi::wag {

/**
 * Wait-and-Go policy: from Idle, enter TX with probability r; a transmission
 * is followed by a mandatory stay of h slots in the Wait chain before
 * returning to Idle. States are 0 (Idle), 1 (TX), 2..h+1 (Wait).
 *
 * h = 0 collapses to the two-state chain with s = 1, which is only used for
 * the equivalence checks; searches stay on h >= 1.
 */
struct WagParams {
    double r;
    int h;
};

void validate(const WagParams& params);

/// Stationary probabilities of the Idle state and of the TX state
/// (q1 is shared by every Wait state as well): q0 = 1/((h+1)r + 1),
/// q1 = r/((h+1)r + 1), so q0 + (h+1) q1 = 1.
struct WagStationary {
    double q0;
    double q1;
};

WagStationary wag_stationary(const WagParams& params);

/**
 * Return probability phi(k) = Prob(Idle at slot k | Idle at slot 1), by the
 * closed form
 *
 *   phi(k) = sum_{e=1}^{floor((k-1)/(h+2))} C(k-1-(h+1)e, e) r^e (1-r)^{k-1-(h+2)e}
 *            + (1-r)^{k-1}
 *
 * for k >= 1 and phi(k) = 0 for k <= 0. Binomials switch to a log-gamma path
 * once the direct product could overflow.
 */
double wag_phi(long long k, const WagParams& params);

/**
 * Cached phi values and their first/second prefix sums for one (r, h),
 * filled by the one-step recursion phi(k) = (1-r) phi(k-1) + r phi(k-h-2)
 * (identical to the closed form; the equivalence is tested to 1e-12).
 * Each variance evaluation reuses O(k_trunc + h) of these values.
 */
class PhiCache {
  public:
    PhiCache(const WagParams& params, int k_max);

    double phi(long long k) const {
        return (k < 1 || k > k_max_) ? 0.0 : phi_[static_cast<std::size_t>(k)];
    }
    /// Phi(k) = sum_{u=1..k} phi(u), 0 for k <= 0.
    double prefix(long long k) const {
        if (k < 1) return 0.0;
        return prefix_[static_cast<std::size_t>(std::min<long long>(k, k_max_))];
    }
    /// Psi(k) = sum_{u=1..k} Phi(u), 0 for k <= 0.
    double prefix2(long long k) const {
        if (k < 1) return 0.0;
        return prefix2_[static_cast<std::size_t>(std::min<long long>(k, k_max_))];
    }
    int k_max() const { return k_max_; }

  private:
    int k_max_;
    std::vector<double> phi_;
    std::vector<double> prefix_;
    std::vector<double> prefix2_;
};

/// Prob(TX at slot k+1 | TX at slot 1) = r phi(k - h - 1); zero for k <= h+1.
double p_tx_given_tx(int k, const WagParams& params, const PhiCache& cache);

/**
 * Prob(not TX at slot k+1 | not TX at slot 1), assembled from the stationary
 * mixture over starting states j in {0, 2..h+1} and targets i in {0, 2..h+1}:
 *
 *   ( r max(h-k, 0)                              [never reaching Idle]
 *   + phi(k+1) + r (Phi(k) - Phi(k-h))            [i = 0]
 *   + r (Phi(k-1) - Phi(k-h-1))                   [i >= 2, j = 0]
 *   + r^2 (Psi(k-2) - 2 Psi(k-h-2) + Psi(k-2h-2)) [i >= 2, j >= 2]
 *   ) / (h r + 1)
 *
 * The i = 0 target is reached without a fresh TX entry, so it carries no
 * extra factor r; this matches the exact chain (see the reference module)
 * and the complement identity 1 - r (phi(k) + r (Phi(k-1) - Phi(k-h-1))) / (hr+1).
 */
double p_silent_given_silent(int k, const WagParams& params, const PhiCache& cache);

/// m_a = q1 (1-q1)^{N-1},  m_p = (1-q1)^{CN}.
ActivePassive wag_means(const WagParams& params, const NetworkShape& shape);

/**
 * Temporal variances from the Markov central limit theorem, truncated at
 * k_trunc lags, with the covariance sum carrying its factor 2:
 *
 *   v_a^2 = m_a - m_a^2 + 2 sum_k (P(TX|TX, k) P(silent|silent, k)^{N-1} - m_a) m_a
 *   v_p^2 = m_p - m_p^2 + 2 sum_k (P(silent|silent, k)^{CN} - m_p) m_p
 */
ActivePassive wag_variances(const WagParams& params, const NetworkShape& shape, int k_trunc);

/// Full pipeline: params -> (means, variances) -> z-th AoI moment roots and objective.
AoiSummary wag_moments(const WagParams& params, const NetworkShape& shape, const Objective& obj,
                       int k_trunc);

struct WagOptimum {
    WagParams params;
    double objective_value;
};

/**
 * Exhaustive grid search over r in {r_step, ..., 1 - r_step} and integer
 * h in {1, ..., h_max}; no early stopping. Ties break toward smaller h,
 * then smaller r.
 */
WagOptimum optimize_wag(const NetworkShape& shape, const Objective& obj, double r_step, int h_max,
                        int k_trunc);

} // namespace aoi::wag
