#include "aoi/two_state.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace aoi::twostate {

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

} // namespace

void validate(const TwoStateParams& params) {
    if (!(params.r >= 0.0 && params.r <= 1.0 && params.s >= 0.0 && params.s <= 1.0))
        throw ParameterError("two-state probabilities must lie in [0, 1]");
    if (params.r + params.s <= 0.0)
        throw DegenerateProcessError("two-state chain with r = s = 0 is absorbing");
}

void validate(const LambdaTheta& lt) {
    if (!(lt.lambda >= 0.0 && lt.lambda <= 1.0))
        throw ParameterError("lambda must lie in [0, 1]");
    if (!(lt.theta > -1.0 && lt.theta <= 1.0))
        throw ParameterError("theta must lie in (-1, 1]");
    // Feasibility of the inverse map: r and s both in [0, 1].
    const double lo = std::max(lt.lambda > 0.0 ? (lt.lambda - 1.0) / lt.lambda
                                               : -std::numeric_limits<double>::infinity(),
                               lt.lambda < 1.0 ? -lt.lambda / (1.0 - lt.lambda)
                                               : -std::numeric_limits<double>::infinity());
    if (lt.theta < lo - 1e-12)
        throw ParameterError("theta below the feasible range for this lambda");
}

LambdaTheta to_lambda_theta(const TwoStateParams& params) {
    validate(params);
    return LambdaTheta{params.r / (params.r + params.s), 1.0 - params.r - params.s};
}

TwoStateParams from_lambda_theta(const LambdaTheta& lt) {
    validate(lt);
    return TwoStateParams{lt.lambda * (1.0 - lt.theta), (1.0 - lt.lambda) * (1.0 - lt.theta)};
}

double g_closed(const LambdaTheta& lt, int k) {
    return lt.lambda + (1.0 - lt.lambda) * std::pow(lt.theta, k - 1);
}

double gbar_closed(const LambdaTheta& lt, int k) {
    return 1.0 - lt.lambda + lt.lambda * std::pow(lt.theta, k - 1);
}

ActivePassive two_state_means(const LambdaTheta& lt, const NetworkShape& shape) {
    validate(lt);
    validate(shape);
    const double lam = lt.lambda;
    const int n = shape.users_per_cluster;
    const int cn = shape.clusters * n;
    return ActivePassive{lam * std::pow(1.0 - lam, n - 1), std::pow(1.0 - lam, cn)};
}

ActivePassive two_state_variances(const LambdaTheta& lt, const NetworkShape& shape, int k_trunc) {
    validate(lt);
    validate(shape);
    if (k_trunc < 1) throw ParameterError("k_trunc must be >= 1");
    if (std::abs(lt.theta) >= 1.0)
        throw DegenerateProcessError("temporal variance requires |theta| < 1");

    const double lam = lt.lambda;
    const int n = shape.users_per_cluster;
    const int cn = shape.clusters * n;
    const auto [m_a, m_p] = two_state_means(lt, shape);

    double cov_a = 0.0;
    double cov_p = 0.0;
    double theta_k = 1.0;
    for (int k = 1; k <= k_trunc; ++k) {
        theta_k *= lt.theta;
        const double g = lam + (1.0 - lam) * theta_k;    // G(k+1)
        const double gb = 1.0 - lam + lam * theta_k;     // Gbar(k+1)
        cov_a += (g * std::pow(gb, n - 1) - m_a) * m_a;
        cov_p += (std::pow(gb, cn) - m_p) * m_p;
        if (theta_k == 0.0) break;
    }

    return ActivePassive{clamp_variance(m_a - m_a * m_a + 2.0 * cov_a, "active"),
                         clamp_variance(m_p - m_p * m_p + 2.0 * cov_p, "passive")};
}

AoiSummary two_state_moments(const TwoStateParams& params, const NetworkShape& shape,
                             const Objective& obj, int k_trunc) {
    validate(obj);
    const LambdaTheta lt = to_lambda_theta(params);
    const ActivePassive means = two_state_means(lt, shape);
    const ActivePassive vars = two_state_variances(lt, shape, k_trunc);

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

TwoStateOptimum optimize_two_state(const NetworkShape& shape, const Objective& obj, double r_step,
                                   int k_trunc) {
    validate(shape);
    validate(obj);
    if (!(r_step > 0.0)) throw ParameterError("r_step must be positive");

    // s = 1 gives lambda = r/(r+1) <= 1/2; the theorem bounds the optimum by 1/N.
    const double lambda_max = std::min(0.5, 1.0 / shape.users_per_cluster);
    TwoStateOptimum best{TwoStateParams{0.0, 1.0}, std::numeric_limits<double>::infinity()};
    for (int j = 1;; ++j) {
        const double lambda = j * r_step;
        if (lambda > lambda_max + 1e-12) break;
        const TwoStateParams params{std::min(1.0, lambda / (1.0 - lambda)), 1.0};
        double f;
        try {
            f = two_state_moments(params, shape, obj, k_trunc).objective_value;
        } catch (const DegenerateProcessError&) {
            continue;
        }
        if (f < best.objective_value) best = TwoStateOptimum{params, f};
    }
    if (!std::isfinite(best.objective_value))
        throw DegenerateProcessError("no feasible grid point in the two-state line search");
    return best;
}

double h_poly(int n, double y) {
    return -(n + 8.0) * y * y * y - (n - 13.0) * y * y - 6.0 * y + 1.0;
}

double hbar_poly(int cn, double y) {
    return (cn - 10.0) * y * y * y - (cn - 13.0) * y * y - 6.0 * y + 1.0;
}

namespace {

template <typename F>
double bisect_unit_interval(F&& f, const char* name) {
    double lo = 0.0;
    double hi = 1.0;
    double flo = f(lo);
    double fhi = f(hi);
    if (!(flo > 0.0 && fhi < 0.0))
        throw DegenerateProcessError(std::string("no sign change on [0, 1] for ") + name);
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fmid = f(mid);
        if (fmid > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (std::abs(f(root)) >= 1e-12)
        throw DegenerateProcessError(std::string("bisection residual too large for ") + name);
    return root;
}

} // namespace

CubicRootsReport cubic_roots(const NetworkShape& shape) {
    validate(shape);
    const int n = shape.users_per_cluster;
    const int cn = shape.clusters * n;
    return CubicRootsReport{
        bisect_unit_interval([n](double y) { return h_poly(n, y); }, "h_N"),
        bisect_unit_interval([cn](double y) { return hbar_poly(cn, y); }, "hbar_CN")};
}

LemmaReport lemma_checks(const NetworkShape& shape, const Objective& obj, const LemmaGrid& grid) {
    validate(shape);
    validate(obj);
    LemmaReport report{};
    const int k_trunc = 1000;

    // (a) positive theta never beats theta = 0 at the same lambda.
    report.positive_theta_never_helps = true;
    report.worst_positive_theta_margin = std::numeric_limits<double>::infinity();
    for (double lambda : grid.lambdas) {
        if (!(lambda > 0.0 && lambda < 1.0)) continue;
        const double f0 =
            two_state_moments(from_lambda_theta(LambdaTheta{lambda, 0.0}), shape, obj, k_trunc)
                .objective_value;
        for (double theta : grid.thetas) {
            if (!(theta > 0.0 && theta < 1.0)) continue;
            const double f =
                two_state_moments(from_lambda_theta(LambdaTheta{lambda, theta}), shape, obj, k_trunc)
                    .objective_value;
            report.worst_positive_theta_margin =
                std::min(report.worst_positive_theta_margin, f - f0);
            if (f < f0 - 1e-12) report.positive_theta_never_helps = false;
        }
    }

    // (b) for theta <= 0 fixed, the objective is non-decreasing in lambda past 1/N.
    report.lambda_monotone_above_inverse_n = true;
    report.worst_lambda_monotonicity_margin = std::numeric_limits<double>::infinity();
    const double inv_n = 1.0 / shape.users_per_cluster;
    for (double theta : grid.thetas) {
        if (theta > 0.0) continue;
        double prev_f = std::numeric_limits<double>::quiet_NaN();
        for (double lambda : grid.lambdas) {
            if (lambda <= inv_n || lambda >= 1.0) continue;
            // theta must stay feasible for r, s in [0, 1].
            if (theta < std::max((lambda - 1.0) / lambda, -lambda / (1.0 - lambda))) continue;
            const double f =
                two_state_moments(from_lambda_theta(LambdaTheta{lambda, theta}), shape, obj, k_trunc)
                    .objective_value;
            if (!std::isnan(prev_f)) {
                report.worst_lambda_monotonicity_margin =
                    std::min(report.worst_lambda_monotonicity_margin, f - prev_f);
                if (f < prev_f - 1e-12) report.lambda_monotone_above_inverse_n = false;
            }
            prev_f = f;
        }
    }

    // (c) root lower bounds.
    report.alpha_exceeds_inverse_n = true;
    report.worst_alpha_margin = std::numeric_limits<double>::infinity();
    for (int n = 5; n <= 200; ++n) {
        const double alpha = cubic_roots(NetworkShape{1, n}).alpha;
        const double margin = alpha - 1.0 / n;
        report.worst_alpha_margin = std::min(report.worst_alpha_margin, margin);
        if (margin <= 0.0) report.alpha_exceeds_inverse_n = false;
    }
    report.beta_exceeds_inverse_n = true;
    report.worst_beta_margin = std::numeric_limits<double>::infinity();
    for (int c = 1; c <= 8; ++c) {
        for (int n = c + 5; n <= 200; ++n) {
            const double beta = cubic_roots(NetworkShape{c, n}).beta;
            const double margin = beta - 1.0 / n;
            report.worst_beta_margin = std::min(report.worst_beta_margin, margin);
            if (margin <= 0.0) report.beta_exceeds_inverse_n = false;
        }
    }
    return report;
}

} // namespace aoi::twostate
