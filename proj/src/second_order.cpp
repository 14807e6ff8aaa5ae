#include "aoi/second_order.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace aoi {

void validate(const SecondOrderPoint& p) {
    if (p.v2 < 0.0 || !std::isfinite(p.v2))
        throw ParameterError("temporal variance must be finite and >= 0, got " + std::to_string(p.v2));
    if (!(p.m > 0.0))
        throw DegenerateProcessError("process mean must be positive, got " + std::to_string(p.m));
    if (p.m > 1.0 || !std::isfinite(p.m))
        throw ParameterError("process mean must be in (0, 1], got " + std::to_string(p.m));
}

void validate(const Objective& obj) {
    if (!(obj.w >= 0.0 && obj.w <= 1.0))
        throw ParameterError("objective weight must be in [0, 1], got " + std::to_string(obj.w));
    if (obj.z < 1 || obj.z > kZMax)
        throw ParameterError("moment order must be in [1, " + std::to_string(kZMax) + "], got " +
                             std::to_string(obj.z));
}

void validate(const NetworkShape& shape) {
    if (shape.clusters < 1 || shape.users_per_cluster < 1)
        throw ParameterError("network shape requires C >= 1 and N >= 1");
}

namespace {

Rational reduced(long long num, long long den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g == 0) g = 1;
    return Rational{num / g, den / g};
}

Rational add(const Rational& a, const Rational& b) {
    return reduced(a.num * b.den + b.num * a.den, a.den * b.den);
}

Rational mul_int(const Rational& a, long long k) { return reduced(a.num * k, a.den); }

} // namespace

BernoulliTable::BernoulliTable(int z_max) {
    if (z_max < 1 || z_max > kZMax)
        throw ParameterError("Bernoulli table order must be in [1, " + std::to_string(kZMax) +
                             "], got " + std::to_string(z_max));
    values_.resize(static_cast<std::size_t>(z_max) + 1);
    values_[0] = Rational{1, 1};
    // sum_{j=0}^{m} C(m+1, j) B_j = 0  =>  B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j
    for (int m = 1; m <= z_max; ++m) {
        Rational acc{0, 1};
        long long binom = 1; // C(m+1, j), built incrementally
        for (int j = 0; j < m; ++j) {
            acc = add(acc, mul_int(values_[static_cast<std::size_t>(j)], binom));
            binom = binom * (m + 1 - j) / (j + 1);
        }
        values_[static_cast<std::size_t>(m)] = reduced(-acc.num, acc.den * (m + 1));
    }
}

BernoulliTable bernoulli_numbers(int z_max) { return BernoulliTable(z_max); }

double ig_moment(const SecondOrderPoint& p, int kappa) {
    validate(p);
    if (kappa < 1) throw ParameterError("moment order kappa must be >= 1");
    const double inv_mk = std::pow(1.0 / p.m, kappa);
    if (p.v2 == 0.0) return inv_mk;
    const double x = p.v2 / (2.0 * p.m);
    // c_zeta = (kappa-1+zeta)! / (zeta! (kappa-1-zeta)!), built by ratio recurrence
    double coeff = 1.0;
    double term = 1.0;
    double sum = 1.0;
    for (int zeta = 0; zeta + 1 <= kappa - 1; ++zeta) {
        coeff *= static_cast<double>(kappa + zeta) * static_cast<double>(kappa - 1 - zeta) /
                 static_cast<double>(zeta + 1);
        term *= x;
        sum += coeff * term;
    }
    return inv_mk * sum;
}

double approx_aoi_moment(const SecondOrderPoint& p, int z) {
    validate(p);
    if (z < 1 || z > kZMax)
        throw ParameterError("moment order z must be in [1, " + std::to_string(kZMax) + "]");
    static const BernoulliTable bernoulli(kZMax);

    double total = ig_moment(p, z + 1) / (z + 1) + ig_moment(p, z) / 2.0;
    double falling = static_cast<double>(z); // z! / (z-kappa+1)! at kappa = 2
    double factorial = 2.0;                  // kappa!
    for (int kappa = 2; kappa <= z; ++kappa) {
        const double b = bernoulli.at(kappa).to_double();
        if (b != 0.0) total += b / factorial * falling * ig_moment(p, z - kappa + 1);
        falling *= static_cast<double>(z - kappa + 1);
        factorial *= static_cast<double>(kappa + 1);
    }
    return total / ig_moment(p, 1);
}

double aoi_root(const SecondOrderPoint& p, int z) {
    return std::pow(approx_aoi_moment(p, z), 1.0 / z);
}

double objective(const SecondOrderPoint& active, const SecondOrderPoint& passive,
                 const Objective& obj) {
    validate(obj);
    double value = 0.0;
    if (obj.w > 0.0) value += obj.w * aoi_root(active, obj.z);
    if (obj.w < 1.0) value += (1.0 - obj.w) * aoi_root(passive, obj.z);
    return value;
}

} // namespace aoi
