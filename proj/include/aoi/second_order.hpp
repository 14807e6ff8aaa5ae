#pragma once

#include <vector>

#include "aoi/types.hpp"

namespace aoi {

/// Exact rational, reduced, denominator > 0.
struct Rational {
    long long num;
    long long den;

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Bernoulli numbers B_0..B_z_max as exact rationals (B_1 = -1/2 convention;
/// the sign of B_1 never enters the AoI expansion, whose sum starts at kappa = 2).
class BernoulliTable {
  public:
    explicit BernoulliTable(int z_max);

    const Rational& at(int k) const { return values_.at(static_cast<std::size_t>(k)); }
    int max_index() const { return static_cast<int>(values_.size()) - 1; }

  private:
    std::vector<Rational> values_;
};

/// Exact Bernoulli numbers by the standard recurrence; 1 <= z_max <= kZMax.
BernoulliTable bernoulli_numbers(int z_max);

/**
 * kappa-th raw moment of the inverse-Gaussian interdelivery time IG(1/m, 1/v2):
 *
 *   E[l^kappa] = (1/m^kappa) * sum_{zeta=0}^{kappa-1}
 *                (kappa-1+zeta)! / (zeta! (kappa-1-zeta)!) * (v2 / (2m))^zeta
 *
 * v2 == 0 degenerates to the deterministic interdelivery time 1/m, keeping
 * only the zeta = 0 term.
 */
double ig_moment(const SecondOrderPoint& p, int kappa);

/**
 * Approximated z-th AoI moment of a process summarized by (m, v2), assembled
 * from the inverse-Gaussian moments with Faulhaber/Bernoulli weights:
 *
 *   E[AoI^z] ~= (1/E[l]) * ( E[l^{z+1}]/(z+1) + E[l^z]/2
 *               + sum_{kappa=2}^{z} B_kappa/kappa! * z!/(z-kappa+1)! * E[l^{z-kappa+1}] )
 */
double approx_aoi_moment(const SecondOrderPoint& p, int z);

/// (approx_aoi_moment(p, z))^(1/z).
double aoi_root(const SecondOrderPoint& p, int z);

/**
 * Weighted objective w * E[AoI_a^z]^(1/z) + (1-w) * E[AoI_p^z]^(1/z).
 * A side with zero weight is never evaluated, so e.g. w == 1 tolerates a
 * degenerate passive point.
 */
double objective(const SecondOrderPoint& active, const SecondOrderPoint& passive,
                 const Objective& obj);

} // namespace aoi
