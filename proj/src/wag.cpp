#include "aoi/wag.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace aoi::wag {

namespace {

constexpr double kVarianceClampTol = 1e-9;

double clamp_variance(double v, const char* which) {
    if (v >= 0.0) return v;
    if (v < -kVarianceClampTol)
        throw DegenerateProcessError(std::string("truncated ") + which +
                                     " variance is negative beyond tolerance: " + std::to_string(v));
    std::cerr << "aoi: clamping slightly negative " << which << " variance " << v << " to 0\n";
    return 0.0;
}

/// C(n, k) in double; direct multiplicative product while safe, log-gamma above.
double binomial(long long n, long long k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    if (n <= 1000) {
        double c = 1.0;
        for (long long i = 1; i <= k; ++i)
            c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        return c;
    }
    return std::exp(std::lgamma(static_cast<double>(n + 1)) -
                    std::lgamma(static_cast<double>(k + 1)) -
                    std::lgamma(static_cast<double>(n - k + 1)));
}

} // namespace

void validate(const WagParams& params) {
    if (!(params.r > 0.0 && params.r < 1.0))
        throw ParameterError("WaG transmit probability must lie in (0, 1)");
    if (params.h < 0) throw ParameterError("WaG wait length must be a non-negative integer");
}

WagStationary wag_stationary(const WagParams& params) {
    validate(params);
    const double denom = (params.h + 1) * params.r + 1.0;
    return WagStationary{1.0 / denom, params.r / denom};
}

double wag_phi(long long k, const WagParams& params) {
    validate(params);
    if (k <= 0) return 0.0;
    const long long h = params.h;
    const double r = params.r;
    double total = std::pow(1.0 - r, static_cast<double>(k - 1));
    const long long e_max = (k - 1) / (h + 2);
    for (long long e = 1; e <= e_max; ++e) {
        const long long idle_slots = k - 1 - (h + 2) * e;
        const double term = binomial(k - 1 - (h + 1) * e, e) *
                            std::pow(r, static_cast<double>(e)) *
                            std::pow(1.0 - r, static_cast<double>(idle_slots));
        total += term;
    }
    return total;
}

PhiCache::PhiCache(const WagParams& params, int k_max) : k_max_(k_max) {
    validate(params);
    if (k_max < 1) throw ParameterError("phi cache length must be >= 1");
    phi_.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    prefix_.assign(phi_.size(), 0.0);
    prefix2_.assign(phi_.size(), 0.0);
    const double r = params.r;
    const int back = params.h + 2;
    phi_[1] = 1.0;
    for (int k = 2; k <= k_max; ++k) {
        const double reentry = (k - back >= 1) ? phi_[static_cast<std::size_t>(k - back)] : 0.0;
        phi_[static_cast<std::size_t>(k)] =
            (1.0 - r) * phi_[static_cast<std::size_t>(k - 1)] + r * reentry;
    }
    for (int k = 1; k <= k_max; ++k) {
        prefix_[static_cast<std::size_t>(k)] =
            prefix_[static_cast<std::size_t>(k - 1)] + phi_[static_cast<std::size_t>(k)];
        prefix2_[static_cast<std::size_t>(k)] =
            prefix2_[static_cast<std::size_t>(k - 1)] + prefix_[static_cast<std::size_t>(k)];
    }
}

double p_tx_given_tx(int k, const WagParams& params, const PhiCache& cache) {
    return params.r * cache.phi(k - params.h - 1);
}

double p_silent_given_silent(int k, const WagParams& params, const PhiCache& cache) {
    const double r = params.r;
    const int h = params.h;
    const double never_idle = r * std::max(h - k, 0);
    const double to_idle = cache.phi(k + 1) + r * (cache.prefix(k) - cache.prefix(k - h));
    const double to_wait_from_idle = r * (cache.prefix(k - 1) - cache.prefix(k - h - 1));
    const double to_wait_from_wait =
        r * r * (cache.prefix2(k - 2) - 2.0 * cache.prefix2(k - h - 2) + cache.prefix2(k - 2 * h - 2));
    return (never_idle + to_idle + to_wait_from_idle + to_wait_from_wait) / (h * r + 1.0);
}

ActivePassive wag_means(const WagParams& params, const NetworkShape& shape) {
    validate(shape);
    const WagStationary q = wag_stationary(params);
    const int n = shape.users_per_cluster;
    const int cn = shape.clusters * n;
    return ActivePassive{q.q1 * std::pow(1.0 - q.q1, n - 1), std::pow(1.0 - q.q1, cn)};
}

ActivePassive wag_variances(const WagParams& params, const NetworkShape& shape, int k_trunc) {
    validate(params);
    validate(shape);
    if (k_trunc < 1) throw ParameterError("k_trunc must be >= 1");

    const int n = shape.users_per_cluster;
    const int cn = shape.clusters * n;
    const auto [m_a, m_p] = wag_means(params, shape);
    const PhiCache cache(params, k_trunc + 2);

    double cov_a = 0.0;
    double cov_p = 0.0;
    for (int k = 1; k <= k_trunc; ++k) {
        const double silent = p_silent_given_silent(k, params, cache);
        cov_a += (p_tx_given_tx(k, params, cache) * std::pow(silent, n - 1) - m_a) * m_a;
        cov_p += (std::pow(silent, cn) - m_p) * m_p;
    }
    return ActivePassive{clamp_variance(m_a - m_a * m_a + 2.0 * cov_a, "active"),
                         clamp_variance(m_p - m_p * m_p + 2.0 * cov_p, "passive")};
}

AoiSummary wag_moments(const WagParams& params, const NetworkShape& shape, const Objective& obj,
                       int k_trunc) {
    validate(obj);
    const ActivePassive means = wag_means(params, shape);
    const ActivePassive vars = wag_variances(params, shape, k_trunc);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    AoiSummary out{nan, nan, 0.0};
    if (obj.w > 0.0) {
        out.aoi_active = aoi_root(SecondOrderPoint{means.active, vars.active}, obj.z);
        out.objective_value += obj.w * out.aoi_active;
    }
    if (obj.w < 1.0) {
        out.aoi_passive = aoi_root(SecondOrderPoint{means.passive, vars.passive}, obj.z);
        out.objective_value += (1.0 - obj.w) * out.aoi_passive;
    }
    return out;
}

WagOptimum optimize_wag(const NetworkShape& shape, const Objective& obj, double r_step, int h_max,
                        int k_trunc) {
    validate(shape);
    validate(obj);
    if (!(r_step > 0.0)) throw ParameterError("r_step must be positive");
    if (h_max < 1) throw ParameterError("h_max must be >= 1");

    WagOptimum best{WagParams{r_step, 1}, std::numeric_limits<double>::infinity()};
    for (int h = 1; h <= h_max; ++h) {
        for (int j = 1;; ++j) {
            const double r = j * r_step;
            if (r >= 1.0 - r_step / 2.0) break;
            double f;
            try {
                f = wag_moments(WagParams{r, h}, shape, obj, k_trunc).objective_value;
            } catch (const DegenerateProcessError&) {
                continue;
            }
            if (f < best.objective_value) best = WagOptimum{WagParams{r, h}, f};
        }
    }
    if (!std::isfinite(best.objective_value))
        throw DegenerateProcessError("no feasible grid point in the WaG grid search");
    return best;
}

} // namespace aoi::wag
