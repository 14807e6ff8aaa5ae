#include "aoi/markov_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "aoi/errors.hpp"

namespace aoi::oracle {

namespace {

constexpr double kResidualTol = 1e-12;

/// Row vector times matrix.
std::vector<double> vec_mat(const std::vector<double>& v, const std::vector<double>& m, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] += vi * m[static_cast<std::size_t>(i) * n + j];
    }
    return out;
}

} // namespace

void validate(const ChainSpec& chain) {
    if (chain.states < 1) throw ParameterError("chain needs at least one state");
    if (chain.transition.size() != static_cast<std::size_t>(chain.states) * chain.states ||
        chain.emit.size() != static_cast<std::size_t>(chain.states))
        throw ParameterError("chain matrix/indicator sizes do not match the state count");
    for (int i = 0; i < chain.states; ++i) {
        double row = 0.0;
        for (int j = 0; j < chain.states; ++j) {
            const double p = chain.p(i, j);
            if (p < 0.0) throw ParameterError("negative transition probability");
            row += p;
        }
        if (std::abs(row - 1.0) > kResidualTol)
            throw ParameterError("transition row " + std::to_string(i) + " does not sum to 1");
    }
}

ChainSpec two_state_chain(double r, double s) {
    // state 0 = Idle, state 1 = TX
    ChainSpec chain{2, {1.0 - r, r, s, 1.0 - s}, {0, 1}};
    validate(chain);
    return chain;
}

ChainSpec wag_chain(double r, int h) {
    // state 0 = Idle, 1 = TX, 2..h+1 = Wait
    const int n = h + 2;
    ChainSpec chain{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0),
                    std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    chain.emit[1] = 1;
    chain.transition[0] = 1.0 - r;
    chain.transition[1] = r;
    for (int i = 1; i < n; ++i) // TX walks the Wait chain; the last Wait state returns to Idle
        chain.transition[static_cast<std::size_t>(i) * n + (i == n - 1 ? 0 : i + 1)] = 1.0;
    validate(chain);
    return chain;
}

std::vector<double> stationary(const ChainSpec& chain) {
    validate(chain);
    const int n = chain.states;

    // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a[static_cast<std::size_t>(i) * n + j] = chain.p(j, i) - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(n - 1) * n + j] = 1.0;
    rhs[static_cast<std::size_t>(n - 1)] = 1.0;

    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[static_cast<std::size_t>(row) * n + col]) >
                std::abs(a[static_cast<std::size_t>(pivot) * n + col]))
                pivot = row;
        if (std::abs(a[static_cast<std::size_t>(pivot) * n + col]) < 1e-14)
            throw ErgodicityError("singular stationary system; chain is not ergodic");
        if (pivot != col) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(col) * n + j],
                          a[static_cast<std::size_t>(pivot) * n + j]);
            std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(pivot)]);
        }
        for (int row = col + 1; row < n; ++row) {
            const double f = a[static_cast<std::size_t>(row) * n + col] /
                             a[static_cast<std::size_t>(col) * n + col];
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j)
                a[static_cast<std::size_t>(row) * n + j] -= f * a[static_cast<std::size_t>(col) * n + j];
            rhs[static_cast<std::size_t>(row)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> pi(static_cast<std::size_t>(n));
    for (int row = n - 1; row >= 0; --row) {
        double acc = rhs[static_cast<std::size_t>(row)];
        for (int j = row + 1; j < n; ++j)
            acc -= a[static_cast<std::size_t>(row) * n + j] * pi[static_cast<std::size_t>(j)];
        pi[static_cast<std::size_t>(row)] = acc / a[static_cast<std::size_t>(row) * n + row];
    }

    // Defining-property residual.
    const std::vector<double> pi_p = vec_mat(pi, chain.transition, n);
    for (int j = 0; j < n; ++j)
        if (std::abs(pi_p[static_cast<std::size_t>(j)] - pi[static_cast<std::size_t>(j)]) > kResidualTol)
            throw ErgodicityError("stationary residual exceeds tolerance");

    // Convergence of transition powers, checked structurally (boolean matrix
    // powers are immune to float drift): there must be a single final class
    // reachable from every state, and the chain restricted to that class must
    // be primitive (some boolean power all-positive; Wielandt bound).
    const auto boolean_square = [](std::vector<std::uint8_t>& m, int dim) {
        std::vector<std::uint8_t> next(static_cast<std::size_t>(dim) * dim, 0);
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k)
                if (m[static_cast<std::size_t>(i) * dim + k])
                    for (int j = 0; j < dim; ++j)
                        next[static_cast<std::size_t>(i) * dim + j] |=
                            m[static_cast<std::size_t>(k) * dim + j];
        m.swap(next);
    };

    std::vector<std::uint8_t> closure(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            closure[static_cast<std::size_t>(i) * n + j] = i == j || chain.p(i, j) > 0.0;
    for (long long len = 1; len < n; len *= 2) boolean_square(closure, n);

    std::vector<int> final_class;
    for (int j = 0; j < n; ++j) {
        bool from_everywhere = true;
        for (int i = 0; i < n; ++i)
            if (!closure[static_cast<std::size_t>(i) * n + j]) from_everywhere = false;
        if (from_everywhere) final_class.push_back(j);
    }
    if (final_class.empty())
        throw ErgodicityError("transition powers do not converge; chain is not ergodic");

    const int m = static_cast<int>(final_class.size());
    std::vector<std::uint8_t> core(static_cast<std::size_t>(m) * m, 0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            core[static_cast<std::size_t>(a) * m + b] = chain.p(final_class[static_cast<std::size_t>(a)],
                                                               final_class[static_cast<std::size_t>(b)]) > 0.0;
    for (long long exponent = 1; exponent < static_cast<long long>(m) * m - 2 * m + 2;
         exponent *= 2)
        boolean_square(core, m);
    for (std::uint8_t reached : core)
        if (!reached)
            throw ErgodicityError("transition powers do not converge; chain is not ergodic");

    return pi;
}

ExactMeanVariance exact_mean_variance(const ChainSpec& chain, const NetworkShape& shape,
                                      int k_trunc) {
    validate(shape);
    if (k_trunc < 1) throw ParameterError("k_trunc must be >= 1");
    if (shape.clusters * shape.users_per_cluster > 12)
        throw ParameterError("exact mean/variance supports C*N <= 12");

    const int n_states = chain.states;
    const std::vector<double> pi = stationary(chain);
    double p_tx = 0.0;
    for (int i = 0; i < n_states; ++i)
        if (chain.emit[static_cast<std::size_t>(i)]) p_tx += pi[static_cast<std::size_t>(i)];
    if (p_tx <= 0.0 || p_tx >= 1.0)
        throw DegenerateProcessError("chain transmits never or always; delivery processes degenerate");

    const int n = shape.users_per_cluster;
    const int cn = shape.clusters * n;
    const double m_a = p_tx * std::pow(1.0 - p_tx, n - 1);
    const double m_p = std::pow(1.0 - p_tx, cn);

    // Conditional start rows.
    std::vector<double> from_tx(static_cast<std::size_t>(n_states), 0.0);
    std::vector<double> from_silent(static_cast<std::size_t>(n_states), 0.0);
    for (int i = 0; i < n_states; ++i) {
        if (chain.emit[static_cast<std::size_t>(i)])
            from_tx[static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(i)] / p_tx;
        else
            from_silent[static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(i)] / (1.0 - p_tx);
    }

    double cov_a = 0.0;
    double cov_p = 0.0;
    double last_a = 0.0;
    double last_p = 0.0;
    for (int k = 1; k <= k_trunc; ++k) {
        from_tx = vec_mat(from_tx, chain.transition, n_states);
        from_silent = vec_mat(from_silent, chain.transition, n_states);
        double g = 0.0;
        double gbar = 0.0;
        for (int i = 0; i < n_states; ++i) {
            if (chain.emit[static_cast<std::size_t>(i)])
                g += from_tx[static_cast<std::size_t>(i)];
            else
                gbar += from_silent[static_cast<std::size_t>(i)];
        }
        last_a = (g * std::pow(gbar, n - 1) - m_a) * m_a;
        last_p = (std::pow(gbar, cn) - m_p) * m_p;
        cov_a += last_a;
        cov_p += last_p;
    }

    // Conservative tail flag from the final covariance terms.
    const double tail = 2.0 * std::max(std::abs(last_a), std::abs(last_p)) * k_trunc;
    return ExactMeanVariance{m_a, std::max(0.0, m_a - m_a * m_a + 2.0 * cov_a), m_p,
                             std::max(0.0, m_p - m_p * m_p + 2.0 * cov_p), tail > 1e-9};
}

// ---------------------------------------------------------------------------
// Joint chains over per-state user counts.
// ---------------------------------------------------------------------------

namespace {

/// All vectors of `users` non-negative counts over `states` states.
class CountSpace {
  public:
    CountSpace(int states, int users) : states_(states) {
        std::vector<int> current(static_cast<std::size_t>(states), 0);
        enumerate(current, 0, users);
    }

    int size() const { return static_cast<int>(vecs_.size()); }
    const std::vector<int>& vec(int idx) const { return vecs_[static_cast<std::size_t>(idx)]; }
    int index_of(const std::vector<int>& c) const { return index_.at(c); }

  private:
    void enumerate(std::vector<int>& current, int state, int remaining) {
        if (state == states_ - 1) {
            current[static_cast<std::size_t>(state)] = remaining;
            index_.emplace(current, static_cast<int>(vecs_.size()));
            vecs_.push_back(current);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            current[static_cast<std::size_t>(state)] = c;
            enumerate(current, state + 1, remaining - c);
        }
    }

    int states_;
    std::vector<std::vector<int>> vecs_;
    std::map<std::vector<int>, int> index_;
};

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Joint process with a per-state success indicator, CSR transition.
struct IndicatorChain {
    int size = 0;
    std::vector<double> pi;
    std::vector<std::uint8_t> success;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;
};

using Successors = std::vector<std::vector<std::pair<int, double>>>;

Successors chain_successors(const ChainSpec& chain) {
    Successors succ(static_cast<std::size_t>(chain.states));
    for (int i = 0; i < chain.states; ++i)
        for (int j = 0; j < chain.states; ++j)
            if (chain.p(i, j) > 0.0) succ[static_cast<std::size_t>(i)].emplace_back(j, chain.p(i, j));
    return succ;
}

/// Multinomial splits of the users in every source state over its successors.
void split_from_state(const CountSpace& space, const Successors& succ,
                      const std::vector<int>& source, int state, std::vector<int>& target,
                      double prob, std::map<int, double>& row) {
    if (state == static_cast<int>(source.size())) {
        row[space.index_of(target)] += prob;
        return;
    }
    const int users = source[static_cast<std::size_t>(state)];
    if (users == 0) {
        split_from_state(space, succ, source, state + 1, target, prob, row);
        return;
    }
    const auto& outs = succ[static_cast<std::size_t>(state)];
    // Compose users into |outs| parts with multinomial weight.
    std::vector<int> parts(outs.size(), 0);
    const double fact_users = factorial(users);
    auto rec = [&](auto&& self, std::size_t slot, int remaining, double weight) -> void {
        if (slot + 1 == outs.size()) {
            parts[slot] = remaining;
            double w = weight * std::pow(outs[slot].second, remaining) / factorial(remaining);
            for (std::size_t t = 0; t < outs.size(); ++t)
                target[static_cast<std::size_t>(outs[t].first)] += parts[t];
            split_from_state(space, succ, source, state + 1, target, prob * fact_users * w, row);
            for (std::size_t t = 0; t < outs.size(); ++t)
                target[static_cast<std::size_t>(outs[t].first)] -= parts[t];
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            parts[slot] = k;
            self(self, slot + 1, remaining - k,
                 weight * std::pow(outs[slot].second, k) / factorial(k));
        }
    };
    rec(rec, 0, users, 1.0);
}

/// Transition rows of the count chain.
std::vector<std::map<int, double>> count_transition(const CountSpace& space,
                                                    const Successors& succ) {
    std::vector<std::map<int, double>> rows(static_cast<std::size_t>(space.size()));
    const int s = static_cast<int>(succ.size());
    for (int idx = 0; idx < space.size(); ++idx) {
        std::vector<int> target(static_cast<std::size_t>(s), 0);
        split_from_state(space, succ, space.vec(idx), 0, target, 1.0,
                         rows[static_cast<std::size_t>(idx)]);
    }
    return rows;
}

double multinomial_pi(const std::vector<int>& c, const std::vector<double>& pi) {
    int users = 0;
    for (int k : c) users += k;
    double p = factorial(users);
    for (std::size_t i = 0; i < c.size(); ++i)
        p *= std::pow(pi[i], c[i]) / factorial(c[i]);
    return p;
}

int emitting_count(const std::vector<int>& c, const ChainSpec& chain) {
    int total = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (chain.emit[i]) total += c[i];
    return total;
}

/// Tracked user (labeled) x counts of the other N-1 cluster users.
/// Success: tracked user emits alone in its cluster.
IndicatorChain active_joint(const ChainSpec& chain, int n_users) {
    const std::vector<double> pi = stationary(chain);
    const Successors succ = chain_successors(chain);
    const CountSpace space(chain.states, n_users - 1);
    const auto count_rows = count_transition(space, succ);
    const int k = space.size();

    IndicatorChain joint;
    joint.size = chain.states * k;
    joint.pi.resize(static_cast<std::size_t>(joint.size));
    joint.success.resize(static_cast<std::size_t>(joint.size));
    joint.row_ptr.assign(static_cast<std::size_t>(joint.size) + 1, 0);

    for (int own = 0; own < chain.states; ++own)
        for (int c = 0; c < k; ++c) {
            const int idx = own * k + c;
            joint.pi[static_cast<std::size_t>(idx)] =
                pi[static_cast<std::size_t>(own)] * multinomial_pi(space.vec(c), pi);
            joint.success[static_cast<std::size_t>(idx)] =
                chain.emit[static_cast<std::size_t>(own)] && emitting_count(space.vec(c), chain) == 0;
        }

    for (int own = 0; own < chain.states; ++own)
        for (int c = 0; c < k; ++c) {
            const int idx = own * k + c;
            for (const auto& [own2, p_own] : succ[static_cast<std::size_t>(own)])
                for (const auto& [c2, p_count] : count_rows[static_cast<std::size_t>(c)]) {
                    joint.col.push_back(own2 * k + c2);
                    joint.val.push_back(p_own * p_count);
                }
            joint.row_ptr[static_cast<std::size_t>(idx) + 1] = static_cast<int>(joint.col.size());
        }
    return joint;
}

/// Counts of all C*N users; success when nobody emits anywhere.
IndicatorChain passive_joint(const ChainSpec& chain, int total_users) {
    const std::vector<double> pi = stationary(chain);
    const Successors succ = chain_successors(chain);
    const CountSpace space(chain.states, total_users);
    const auto count_rows = count_transition(space, succ);

    IndicatorChain joint;
    joint.size = space.size();
    joint.pi.resize(static_cast<std::size_t>(joint.size));
    joint.success.resize(static_cast<std::size_t>(joint.size));
    joint.row_ptr.assign(static_cast<std::size_t>(joint.size) + 1, 0);
    for (int c = 0; c < joint.size; ++c) {
        joint.pi[static_cast<std::size_t>(c)] = multinomial_pi(space.vec(c), pi);
        joint.success[static_cast<std::size_t>(c)] = emitting_count(space.vec(c), chain) == 0;
        for (const auto& [c2, p] : count_rows[static_cast<std::size_t>(c)]) {
            joint.col.push_back(c2);
            joint.val.push_back(p);
        }
        joint.row_ptr[static_cast<std::size_t>(c) + 1] = static_cast<int>(joint.col.size());
    }
    return joint;
}

struct AgeResult {
    std::vector<double> moments;
    double tail_bound;
    long long cap_used;
};

/**
 * Stationary age distribution by sub-probability propagation: nu_1 is the
 * stationary mass on success states; each further step applies the transition
 * and masks success states out. mass(nu_a) = Prob(AoI = a).
 */
AgeResult age_moments(const IndicatorChain& joint, int z_max, long long start_cap) {
    constexpr long long kHardCap = 1u << 22;
    std::vector<double> nu(static_cast<std::size_t>(joint.size));
    for (int i = 0; i < joint.size; ++i)
        nu[static_cast<std::size_t>(i)] =
            joint.success[static_cast<std::size_t>(i)] ? joint.pi[static_cast<std::size_t>(i)] : 0.0;

    std::vector<double> moments(static_cast<std::size_t>(z_max), 0.0);
    double assigned = 0.0;
    std::vector<double> next(static_cast<std::size_t>(joint.size));
    long long age = 1;
    while (true) {
        double mass = 0.0;
        for (double x : nu) mass += x;
        double power = 1.0;
        for (int z = 1; z <= z_max; ++z) {
            power *= static_cast<double>(age);
            moments[static_cast<std::size_t>(z - 1)] += power * mass;
        }
        assigned += mass;
        const double alive = std::max(0.0, 1.0 - assigned);
        const double bound = alive * std::pow(static_cast<double>(age), z_max);
        if (age >= start_cap && bound < 1e-8) return AgeResult{moments, bound, age};
        if (age >= kHardCap) {
            if (alive > 1e-6)
                throw AgeCapError("age cap exhausted with residual mass " + std::to_string(alive));
            return AgeResult{moments, bound, age};
        }
        // nu <- (nu P) masked to failure states
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < joint.size; ++i) {
            const double vi = nu[static_cast<std::size_t>(i)];
            if (vi == 0.0) continue;
            for (int e = joint.row_ptr[static_cast<std::size_t>(i)];
                 e < joint.row_ptr[static_cast<std::size_t>(i) + 1]; ++e)
                next[static_cast<std::size_t>(joint.col[static_cast<std::size_t>(e)])] +=
                    vi * joint.val[static_cast<std::size_t>(e)];
        }
        for (int i = 0; i < joint.size; ++i)
            if (joint.success[static_cast<std::size_t>(i)]) next[static_cast<std::size_t>(i)] = 0.0;
        nu.swap(next);
        ++age;
    }
}

} // namespace

ExactAoiMoments exact_aoi_moments(const ChainSpec& chain, const NetworkShape& shape, int z_max,
                                  long long age_cap) {
    validate(shape);
    if (z_max < 1 || z_max > kZMax) throw ParameterError("z_max must be in [1, 10]");
    if (age_cap < 1) throw ParameterError("age cap must be >= 1");

    const IndicatorChain active = active_joint(chain, shape.users_per_cluster);
    const IndicatorChain passive =
        passive_joint(chain, shape.clusters * shape.users_per_cluster);
    if (active.size > 1000000 || passive.size > 1000000)
        throw ParameterError("joint chain too large for the exact age computation");

    const AgeResult res_a = age_moments(active, z_max, age_cap);
    const AgeResult res_p = age_moments(passive, z_max, age_cap);
    return ExactAoiMoments{res_a.moments, res_p.moments, res_a.tail_bound, res_p.tail_bound,
                           std::max(res_a.cap_used, res_p.cap_used)};
}

} // namespace aoi::oracle
