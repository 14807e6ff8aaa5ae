#include "aoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "aoi/parallel.hpp"
#include "aoi/rng.hpp"

namespace aoi::sim {

namespace {

// ---------------------------------------------------------------------------
// Policy dynamics. Each one provides: State, init(stream), transmits(state),
// advance(state, stream). States are drawn from the stationary distribution
// (ALOHA is memoryless; ATA starts eligible by construction).
// ---------------------------------------------------------------------------

struct TwoStateDyn {
    double r, s;
    struct State {
        int tx;
    };
    State init(rng::Stream& g) const { return State{g.bernoulli(r / (r + s)) ? 1 : 0}; }
    bool transmits(const State& st) const { return st.tx == 1; }
    void advance(State& st, rng::Stream& g) const {
        st.tx = st.tx ? (g.bernoulli(s) ? 0 : 1) : (g.bernoulli(r) ? 1 : 0);
    }
};

struct WagDyn {
    double r;
    int h;
    struct State {
        int pos; // 0 Idle, 1 TX, 2..h+1 Wait
    };
    State init(rng::Stream& g) const {
        const double denom = (h + 1) * r + 1.0;
        const double u = g.next_unit() * denom;
        if (u < 1.0) return State{0};
        return State{1 + std::min(h, static_cast<int>((u - 1.0) / r))};
    }
    bool transmits(const State& st) const { return st.pos == 1; }
    void advance(State& st, rng::Stream& g) const {
        if (st.pos == 0)
            st.pos = g.bernoulli(r) ? 1 : 0;
        else
            st.pos = st.pos == h + 1 ? 0 : st.pos + 1;
    }
};

struct AlohaDyn {
    double p;
    struct State {
        int tx;
    };
    State init(rng::Stream& g) const { return State{g.bernoulli(p) ? 1 : 0}; }
    bool transmits(const State& st) const { return st.tx == 1; }
    void advance(State& st, rng::Stream& g) const { st.tx = g.bernoulli(p) ? 1 : 0; }
};

struct AtaDyn {
    double p;
    double threshold;
    struct State {
        int elapsed; // slots since own last transmission, saturated at the cap
        int tx;
    };
    int cap() const { return static_cast<int>(std::ceil(threshold)) + 1; }
    State init(rng::Stream& g) const {
        State st{cap(), 0};
        st.tx = g.bernoulli(p) ? 1 : 0; // elapsed >= threshold, always eligible at start
        return st;
    }
    bool transmits(const State& st) const { return st.tx == 1; }
    void advance(State& st, rng::Stream& g) const {
        st.elapsed = st.tx ? 1 : std::min(st.elapsed + 1, cap());
        st.tx = (st.elapsed >= threshold && g.bernoulli(p)) ? 1 : 0;
    }
};

struct PreAssignedDyn {
    const PreAssignedPolicy* policy;
    int users_per_cluster;
    struct State {
        const std::string* seq;
        int pos;
    };
    const std::string& sequence_for(int user) const {
        const auto& rows = policy->sequences;
        return rows.size() == static_cast<std::size_t>(users_per_cluster)
                   ? rows[static_cast<std::size_t>(user % users_per_cluster)]
                   : rows[static_cast<std::size_t>(user)];
    }
    State init_for_user(int user, rng::Stream& g) const {
        const std::string& seq = sequence_for(user);
        const int offset =
            policy->random_offsets ? static_cast<int>(g.next_below(seq.size())) : 0;
        return State{&seq, offset};
    }
    bool transmits(const State& st) const { return (*st.seq)[static_cast<std::size_t>(st.pos)] == '1'; }
    void advance(State& st, rng::Stream&) const {
        st.pos = st.pos + 1 == static_cast<int>(st.seq->size()) ? 0 : st.pos + 1;
    }
};

// init_for_user lets the pre-assigned policy pick per-user rows; the other
// policies ignore the user index.
template <typename Dyn>
typename Dyn::State init_state(const Dyn& dyn, int /*user*/, rng::Stream& g) {
    return dyn.init(g);
}
PreAssignedDyn::State init_state(const PreAssignedDyn& dyn, int user, rng::Stream& g) {
    return dyn.init_for_user(user, g);
}

template <typename Dyn>
RunStats run_dyn(const SimConfig& config, int run_index, const Dyn& dyn) {
    const int n = config.shape.users_per_cluster;
    const int users = config.shape.clusters * n;
    const long long slots = config.slots;
    const int z_max = config.z_max;

    const std::uint64_t run_key = rng::fold_in(config.seed, static_cast<std::uint64_t>(run_index));
    std::vector<rng::Stream> streams;
    streams.reserve(static_cast<std::size_t>(users));
    std::vector<typename Dyn::State> states;
    states.reserve(static_cast<std::size_t>(users));
    for (int u = 0; u < users; ++u) {
        streams.emplace_back(rng::fold_in(run_key, static_cast<std::uint64_t>(u)));
        states.push_back(init_state(dyn, u, streams.back()));
    }

    std::vector<long long> age(static_cast<std::size_t>(users), 1);
    std::vector<long long> delivered(static_cast<std::size_t>(users), 0);
    long long age_p = 1;
    long long detections = 0;
    std::vector<double> mom_a(static_cast<std::size_t>(z_max), 0.0);
    std::vector<double> mom_p(static_cast<std::size_t>(z_max), 0.0);

    // Batch means over the first batches*batch_len slots.
    const int batches = slots >= 200 ? 100 : 1;
    const long long batch_len = slots / batches;
    std::vector<double> batch_a(static_cast<std::size_t>(users) * batches, 0.0);
    std::vector<double> batch_p(static_cast<std::size_t>(batches), 0.0);

    std::vector<std::uint8_t> tx(static_cast<std::size_t>(users), 0);
    std::vector<int> cluster_tx(static_cast<std::size_t>(config.shape.clusters), 0);

    for (long long t = 0; t < slots; ++t) {
        int total_tx = 0;
        std::fill(cluster_tx.begin(), cluster_tx.end(), 0);
        for (int u = 0; u < users; ++u) {
            const bool sends = dyn.transmits(states[static_cast<std::size_t>(u)]);
            tx[static_cast<std::size_t>(u)] = sends;
            if (sends) {
                ++cluster_tx[static_cast<std::size_t>(u / n)];
                ++total_tx;
            }
        }
        const long long batch = std::min<long long>(t / batch_len, batches - 1);
        for (int u = 0; u < users; ++u) {
            const bool success =
                tx[static_cast<std::size_t>(u)] && cluster_tx[static_cast<std::size_t>(u / n)] == 1;
            if (success) {
                age[static_cast<std::size_t>(u)] = 1;
                ++delivered[static_cast<std::size_t>(u)];
                if (t < batch_len * batches)
                    batch_a[static_cast<std::size_t>(u) * batches + batch] += 1.0;
            } else {
                ++age[static_cast<std::size_t>(u)];
            }
            double power = 1.0;
            for (int z = 0; z < z_max; ++z) {
                power *= static_cast<double>(age[static_cast<std::size_t>(u)]);
                mom_a[static_cast<std::size_t>(z)] += power;
            }
        }
        if (total_tx == 0) {
            age_p = 1;
            ++detections;
            if (t < batch_len * batches) batch_p[static_cast<std::size_t>(batch)] += 1.0;
        } else {
            ++age_p;
        }
        double power = 1.0;
        for (int z = 0; z < z_max; ++z) {
            power *= static_cast<double>(age_p);
            mom_p[static_cast<std::size_t>(z)] += power;
        }
        for (int u = 0; u < users; ++u)
            dyn.advance(states[static_cast<std::size_t>(u)], streams[static_cast<std::size_t>(u)]);
    }

    RunStats stats;
    long long total_delivered = 0;
    stats.deliveries_per_user.resize(static_cast<std::size_t>(users));
    for (int u = 0; u < users; ++u) {
        total_delivered += delivered[static_cast<std::size_t>(u)];
        stats.deliveries_per_user[static_cast<std::size_t>(u)] =
            static_cast<double>(delivered[static_cast<std::size_t>(u)]);
    }
    const double denom_a = static_cast<double>(slots) * users;
    stats.m_hat_a = static_cast<double>(total_delivered) / denom_a;
    stats.m_hat_p = static_cast<double>(detections) / static_cast<double>(slots);
    stats.aoi_moments_a.resize(static_cast<std::size_t>(z_max));
    stats.aoi_moments_p.resize(static_cast<std::size_t>(z_max));
    for (int z = 0; z < z_max; ++z) {
        stats.aoi_moments_a[static_cast<std::size_t>(z)] = mom_a[static_cast<std::size_t>(z)] / denom_a;
        stats.aoi_moments_p[static_cast<std::size_t>(z)] =
            mom_p[static_cast<std::size_t>(z)] / static_cast<double>(slots);
    }

    if (batches > 1) {
        double acc = 0.0;
        for (int u = 0; u < users; ++u) {
            const double mean_u =
                static_cast<double>(delivered[static_cast<std::size_t>(u)]) / slots;
            double ssq = 0.0;
            for (int b = 0; b < batches; ++b) {
                const double d =
                    batch_a[static_cast<std::size_t>(u) * batches + b] - batch_len * mean_u;
                ssq += d * d;
            }
            acc += ssq / (static_cast<double>(batch_len) * (batches - 1));
        }
        stats.v2_hat_a = acc / users;
        double ssq = 0.0;
        for (int b = 0; b < batches; ++b) {
            const double d = batch_p[static_cast<std::size_t>(b)] - batch_len * stats.m_hat_p;
            ssq += d * d;
        }
        stats.v2_hat_p = ssq / (static_cast<double>(batch_len) * (batches - 1));
    }

    const Objective& obj = config.objective;
    stats.f_hat = 0.0;
    if (obj.w > 0.0)
        stats.f_hat +=
            obj.w * std::pow(stats.aoi_moments_a[static_cast<std::size_t>(obj.z - 1)], 1.0 / obj.z);
    if (obj.w < 1.0)
        stats.f_hat += (1.0 - obj.w) *
                       std::pow(stats.aoi_moments_p[static_cast<std::size_t>(obj.z - 1)], 1.0 / obj.z);
    return stats;
}

} // namespace

void validate(const PolicySpec& policy, const NetworkShape& shape) {
    validate(shape);
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TwoStatePolicy>) {
                if (!(p.r >= 0.0 && p.r <= 1.0 && p.s >= 0.0 && p.s <= 1.0 && p.r + p.s > 0.0))
                    throw ParameterError("two-state policy needs r, s in [0,1] with r + s > 0");
            } else if constexpr (std::is_same_v<T, WagPolicy>) {
                if (!(p.r > 0.0 && p.r < 1.0) || p.h < 0)
                    throw ParameterError("WaG policy needs r in (0,1) and H >= 0");
            } else if constexpr (std::is_same_v<T, SlottedAlohaPolicy>) {
                if (!(p.p > 0.0 && p.p <= 1.0))
                    throw ParameterError("ALOHA probability must lie in (0, 1]");
            } else if constexpr (std::is_same_v<T, AgeThresholdAlohaPolicy>) {
                if (!(p.p > 0.0 && p.p <= 1.0) || !(p.threshold >= 0.0))
                    throw ParameterError("ATA needs p in (0,1] and a non-negative threshold");
            } else {
                const auto& rows = p.sequences;
                const std::size_t n = static_cast<std::size_t>(shape.users_per_cluster);
                const std::size_t cn = static_cast<std::size_t>(shape.clusters) * n;
                if (rows.size() != n && rows.size() != cn)
                    throw ParameterError("pre-assigned schedules must cover N or C*N users");
                for (const auto& row : rows) {
                    if (row.empty() || row.size() != rows.front().size())
                        throw ParameterError("pre-assigned schedules must share one period >= 1");
                    if (row.find_first_not_of("01") != std::string::npos)
                        throw ParameterError("pre-assigned schedules may contain only '0'/'1'");
                }
            }
        },
        policy);
}

std::string policy_name(const PolicySpec& policy) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TwoStatePolicy>) return "two-state";
            if constexpr (std::is_same_v<T, WagPolicy>) return "wag";
            if constexpr (std::is_same_v<T, SlottedAlohaPolicy>) return "aloha";
            if constexpr (std::is_same_v<T, AgeThresholdAlohaPolicy>) return "ata";
            return "preassigned";
        },
        policy);
}

PreAssignedPolicy load_preassigned(const std::filesystem::path& file, const NetworkShape& shape,
                                   bool random_offsets) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open sequence file " + file.string());
    PreAssignedPolicy policy;
    policy.random_offsets = random_offsets;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        policy.sequences.push_back(line);
    }
    validate(PolicySpec{policy}, shape);
    return policy;
}

void validate(const SimConfig& config) {
    validate(config.shape);
    validate(config.policy, config.shape);
    validate(config.objective);
    if (config.slots < 1 || config.runs < 1)
        throw ParameterError("simulation needs slots >= 1 and runs >= 1");
    if (config.z_max < config.objective.z)
        throw ParameterError("z_max must cover the objective's moment order");
}

RunStats simulate_run(const SimConfig& config, int run_index) {
    validate(config);
    return std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TwoStatePolicy>)
                return run_dyn(config, run_index, TwoStateDyn{p.r, p.s});
            else if constexpr (std::is_same_v<T, WagPolicy>)
                return run_dyn(config, run_index, WagDyn{p.r, p.h});
            else if constexpr (std::is_same_v<T, SlottedAlohaPolicy>)
                return run_dyn(config, run_index, AlohaDyn{p.p});
            else if constexpr (std::is_same_v<T, AgeThresholdAlohaPolicy>)
                return run_dyn(config, run_index, AtaDyn{p.p, p.threshold});
            else
                return run_dyn(config, run_index,
                               PreAssignedDyn{&p, config.shape.users_per_cluster});
        },
        config.policy);
}

SimResult simulate(const SimConfig& config, int threads) {
    validate(config);
    SimResult result;
    result.per_run.resize(static_cast<std::size_t>(config.runs));
    parallel_for(config.runs, threads, [&](long long run) {
        result.per_run[static_cast<std::size_t>(run)] =
            simulate_run(config, static_cast<int>(run));
    });

    const int users = config.shape.clusters * config.shape.users_per_cluster;
    const int z_max = config.z_max;
    RunStats& agg = result.aggregate;
    agg.aoi_moments_a.assign(static_cast<std::size_t>(z_max), 0.0);
    agg.aoi_moments_p.assign(static_cast<std::size_t>(z_max), 0.0);
    agg.deliveries_per_user.assign(static_cast<std::size_t>(users), 0.0);
    double batch_v2_a = 0.0;
    double batch_v2_p = 0.0;
    for (const RunStats& run : result.per_run) {
        agg.m_hat_a += run.m_hat_a;
        agg.m_hat_p += run.m_hat_p;
        batch_v2_a += run.v2_hat_a;
        batch_v2_p += run.v2_hat_p;
        for (int z = 0; z < z_max; ++z) {
            agg.aoi_moments_a[static_cast<std::size_t>(z)] +=
                run.aoi_moments_a[static_cast<std::size_t>(z)];
            agg.aoi_moments_p[static_cast<std::size_t>(z)] +=
                run.aoi_moments_p[static_cast<std::size_t>(z)];
        }
        for (int u = 0; u < users; ++u)
            agg.deliveries_per_user[static_cast<std::size_t>(u)] +=
                run.deliveries_per_user[static_cast<std::size_t>(u)];
    }
    const double runs = static_cast<double>(config.runs);
    agg.m_hat_a /= runs;
    agg.m_hat_p /= runs;
    for (int z = 0; z < z_max; ++z) {
        agg.aoi_moments_a[static_cast<std::size_t>(z)] /= runs;
        agg.aoi_moments_p[static_cast<std::size_t>(z)] /= runs;
    }
    for (int u = 0; u < users; ++u) agg.deliveries_per_user[static_cast<std::size_t>(u)] /= runs;

    // Across-run temporal variance estimator under the pooled mean.
    if (config.runs > 1) {
        const double slots = static_cast<double>(config.slots);
        double acc = 0.0;
        for (int u = 0; u < users; ++u) {
            double ssq = 0.0;
            for (const RunStats& run : result.per_run) {
                const double x = (run.deliveries_per_user[static_cast<std::size_t>(u)] -
                                  slots * agg.m_hat_a) /
                                 std::sqrt(slots);
                ssq += x * x;
            }
            acc += ssq / (runs - 1.0);
        }
        agg.v2_hat_a = acc / users;
        double ssq = 0.0;
        for (const RunStats& run : result.per_run) {
            const double x = (run.m_hat_p * slots - slots * agg.m_hat_p) / std::sqrt(slots);
            ssq += x * x;
        }
        agg.v2_hat_p = ssq / (runs - 1.0);
    } else {
        agg.v2_hat_a = batch_v2_a;
        agg.v2_hat_p = batch_v2_p;
    }

    const Objective& obj = config.objective;
    agg.f_hat = 0.0;
    if (obj.w > 0.0)
        agg.f_hat +=
            obj.w * std::pow(agg.aoi_moments_a[static_cast<std::size_t>(obj.z - 1)], 1.0 / obj.z);
    if (obj.w < 1.0)
        agg.f_hat += (1.0 - obj.w) *
                     std::pow(agg.aoi_moments_p[static_cast<std::size_t>(obj.z - 1)], 1.0 / obj.z);
    return result;
}

AlohaSweep sweep_optimal_aloha(const NetworkShape& shape, const Objective& obj, long long slots,
                               int runs, std::uint64_t seed, double p_step, int threads) {
    if (!(p_step > 0.0)) throw ParameterError("p_step must be positive");
    std::vector<double> grid;
    for (int j = 1;; ++j) {
        const double p = j * p_step;
        if (p >= 1.0 - p_step / 2.0) break;
        grid.push_back(p);
    }
    std::vector<double> f(grid.size());
    parallel_for(static_cast<long long>(grid.size()), threads, [&](long long i) {
        SimConfig config{shape, SlottedAlohaPolicy{grid[static_cast<std::size_t>(i)]}, slots, runs,
                         seed, obj, std::max(3, obj.z)};
        f[static_cast<std::size_t>(i)] = simulate(config, 1).aggregate.f_hat;
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (f[i] < f[best]) best = i;
    return AlohaSweep{grid[best], f[best]};
}

WagSweep sweep_wag_empirical(const NetworkShape& shape, const Objective& obj,
                             long long slots_per_run, int runs, std::uint64_t seed, double r_step,
                             int h_max, int threads) {
    if (!(r_step > 0.0)) throw ParameterError("r_step must be positive");
    if (h_max < 1) throw ParameterError("h_max must be >= 1");
    std::vector<wag::WagParams> grid;
    for (int h = 1; h <= h_max; ++h)
        for (int j = 1;; ++j) {
            const double r = j * r_step;
            if (r >= 1.0 - r_step / 2.0) break;
            grid.push_back(wag::WagParams{r, h});
        }
    std::vector<double> f(grid.size());
    parallel_for(static_cast<long long>(grid.size()), threads, [&](long long i) {
        const wag::WagParams& p = grid[static_cast<std::size_t>(i)];
        SimConfig config{shape, WagPolicy{p.r, p.h}, slots_per_run, runs, seed, obj,
                         std::max(3, obj.z)};
        f[static_cast<std::size_t>(i)] = simulate(config, 1).aggregate.f_hat;
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (f[i] < f[best]) best = i;
    return WagSweep{grid[best], f[best], slots_per_run * runs < 1000};
}

} // namespace aoi::sim
