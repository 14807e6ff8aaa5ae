#pragma once

#include "aoi/errors.hpp"

namespace aoi {

/// Largest supported moment order z. Factorials and Bernoulli magnitudes up to
/// this order stay well inside double range.
inline constexpr int kZMax = 10;

/**
 * Second-order summary of a delivery/detection process: the fraction of slots
 * with a success (m) and the per-slot temporal variance of the centered
 * cumulative success count (v2).
 *
 * Valid range: 0 < m <= 1, v2 >= 0. v2 == 0 is the deterministic limit
 * (exactly periodic successes), not an error.
 */
struct SecondOrderPoint {
    double m;
    double v2;
};

/// Weighted-moment objective: w in [0,1] weights the active term, z >= 1 is
/// the moment order. w == 1 ignores the passive process entirely (and vice versa).
struct Objective {
    double w;
    int z;
};

/// C clusters of N mutually interfering active users. Clusters do not
/// interfere with each other; the single passive observer hears all C*N users.
struct NetworkShape {
    int clusters;          // C
    int users_per_cluster; // N
};

void validate(const SecondOrderPoint& p);
void validate(const Objective& obj);
void validate(const NetworkShape& shape);

/// (m_a, m_p) or (v_a^2, v_p^2) pair for active users and the passive observer.
struct ActivePassive {
    double active;
    double passive;
};

/// z-th roots of the approximated AoI moments plus the weighted objective.
/// A side with zero weight may be skipped; its root is then NaN.
struct AoiSummary {
    double aoi_active;
    double aoi_passive;
    double objective_value;
};

} // namespace aoi
