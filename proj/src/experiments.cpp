#include "aoi/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "aoi/markov_oracle.hpp"
#include "aoi/parallel.hpp"
#include "aoi/rng.hpp"
#include "aoi/sim.hpp"
#include "aoi/wag.hpp"

namespace aoi::experiments {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int resolve_threads(int configured) {
    return configured > 0 ? configured : default_thread_count();
}

std::uint64_t seed_or_default(const cfg::ExperimentConfig& config, const char* name) {
    return config.seed != 0 ? config.seed : cfg::default_seed(name);
}

double moment_root(const std::vector<double>& moments, int z) {
    return std::pow(moments[static_cast<std::size_t>(z - 1)], 1.0 / z);
}

/// Weighted objective recomputed from aggregate moments for any (w, z).
double f_from(const sim::RunStats& agg, double w, int z) {
    double f = 0.0;
    if (w > 0.0) f += w * moment_root(agg.aoi_moments_a, z);
    if (w < 1.0) f += (1.0 - w) * moment_root(agg.aoi_moments_p, z);
    return f;
}

int max_z(const std::vector<int>& z_list) {
    int m = 1;
    for (int z : z_list) m = std::max(m, z);
    return std::max(m, 3);
}

std::string shape_tag(const NetworkShape& shape) {
    return "C" + std::to_string(shape.clusters) + "N" + std::to_string(shape.users_per_cluster);
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

/// r grid for the two-state studies: lambda = r/(r+s) must stay within (0, 1/N]
/// and theta = 1-r-s above -1.
std::vector<double> two_state_r_grid(const NetworkShape& shape, double s,
                                     const std::vector<double>& explicit_grid, int points) {
    if (!explicit_grid.empty()) return explicit_grid;
    const int n = shape.users_per_cluster;
    double r_max = std::min(1.0, 1.9 - s);
    if (n > 1) r_max = std::min(r_max, s / (n - 1));
    std::vector<double> grid;
    for (int j = 1; j <= points; ++j) grid.push_back(r_max * j / points);
    return grid;
}

std::vector<int> wag_h_grid(const std::vector<int>& explicit_grid) {
    if (!explicit_grid.empty()) return explicit_grid;
    std::vector<int> grid;
    for (int h = 1; h <= 10; ++h) grid.push_back(h);
    return grid;
}

void track_worst(std::map<std::pair<int, bool>, double>& worst, int z, bool active, double value) {
    auto& slot = worst[{z, active}];
    slot = std::max(slot, value);
}

} // namespace

// ---------------------------------------------------------------------------
// Mismatch studies
// ---------------------------------------------------------------------------

MismatchResult run_mismatch_two_state(const cfg::ExperimentConfig& config) {
    const NetworkShape shape = config.shape;
    validate(shape);
    const int threads = resolve_threads(config.threads);
    const std::uint64_t seed = seed_or_default(config, "mismatch-two-state");
    const int zm = max_z(config.z_list);

    struct Cell {
        double s;
        double r;
        sim::RunStats agg;
    };
    std::vector<Cell> cells;
    for (double s : config.s_list)
        for (double r : two_state_r_grid(shape, s, config.r_list, 10))
            cells.push_back(Cell{s, r, {}});

    parallel_for(static_cast<long long>(cells.size()), threads, [&](long long i) {
        Cell& cell = cells[static_cast<std::size_t>(i)];
        sim::SimConfig sc{shape, sim::TwoStatePolicy{cell.r, cell.s}, config.slots, config.runs,
                          seed, Objective{0.5, 1}, zm};
        cell.agg = simulate(sc, 1).aggregate;
    });

    MismatchResult result;
    result.notes.push_back("model=two-state shape=" + shape_tag(shape));
    result.notes.push_back("rng=" + std::string(rng::kAlgorithmId));
    for (const Cell& cell : cells) {
        const auto lt = twostate::to_lambda_theta(twostate::TwoStateParams{cell.r, cell.s});
        const ActivePassive means = twostate::two_state_means(lt, shape);
        const ActivePassive vars = twostate::two_state_variances(lt, shape, config.k_trunc);
        for (int z : config.z_list) {
            for (bool active : {true, false}) {
                report::Row row;
                row.experiment = active ? "mismatch-two-state:active" : "mismatch-two-state:passive";
                row.c = shape.clusters;
                row.n = shape.users_per_cluster;
                row.w = kNaN;
                row.z = z;
                row.policy = "two-state";
                row.param1 = cell.r;
                row.param2 = cell.s;
                row.seed = seed;
                row.runs = config.runs;
                row.slots = config.slots;
                row.rng_id = rng::kAlgorithmId;
                row.f_value = kNaN;
                const double m = active ? means.active : means.passive;
                const double v2 = active ? vars.active : vars.passive;
                if (m <= 0.0) { // infeasible cell: flagged, not fatal
                    row.theoretical = kNaN;
                    row.empirical = kNaN;
                    row.mismatch = kNaN;
                    result.rows.push_back(row);
                    continue;
                }
                row.theoretical = aoi_root(SecondOrderPoint{m, v2}, z);
                row.empirical =
                    moment_root(active ? cell.agg.aoi_moments_a : cell.agg.aoi_moments_p, z);
                row.mismatch = report::mismatch_fraction(row.theoretical, row.empirical);
                track_worst(result.worst, z, active, row.mismatch);
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

MismatchResult run_mismatch_wag(const cfg::ExperimentConfig& config) {
    const NetworkShape shape = config.shape;
    validate(shape);
    const int threads = resolve_threads(config.threads);
    const std::uint64_t seed = seed_or_default(config, "mismatch-wag");
    const int zm = max_z(config.z_list);
    const std::vector<double> r_list = config.r_list.empty() ? std::vector<double>{0.3, 0.5}
                                                             : config.r_list;
    const std::vector<int> h_list = wag_h_grid(config.h_list);

    struct Cell {
        double r;
        int h;
        sim::RunStats agg;
    };
    std::vector<Cell> cells;
    for (double r : r_list)
        for (int h : h_list) cells.push_back(Cell{r, h, {}});

    parallel_for(static_cast<long long>(cells.size()), threads, [&](long long i) {
        Cell& cell = cells[static_cast<std::size_t>(i)];
        sim::SimConfig sc{shape, sim::WagPolicy{cell.r, cell.h}, config.slots, config.runs, seed,
                          Objective{0.5, 1}, zm};
        cell.agg = simulate(sc, 1).aggregate;
    });

    MismatchResult result;
    result.notes.push_back("model=wag shape=" + shape_tag(shape));
    result.notes.push_back("rng=" + std::string(rng::kAlgorithmId));
    for (const Cell& cell : cells) {
        const wag::WagParams params{cell.r, cell.h};
        const ActivePassive means = wag::wag_means(params, shape);
        const ActivePassive vars = wag::wag_variances(params, shape, config.k_trunc);
        for (int z : config.z_list) {
            for (bool active : {true, false}) {
                report::Row row;
                row.experiment = active ? "mismatch-wag:active" : "mismatch-wag:passive";
                row.c = shape.clusters;
                row.n = shape.users_per_cluster;
                row.w = kNaN;
                row.z = z;
                row.policy = "wag";
                row.param1 = cell.r;
                row.param2 = cell.h;
                row.seed = seed;
                row.runs = config.runs;
                row.slots = config.slots;
                row.rng_id = rng::kAlgorithmId;
                row.f_value = kNaN;
                const double m = active ? means.active : means.passive;
                const double v2 = active ? vars.active : vars.passive;
                row.theoretical = aoi_root(SecondOrderPoint{m, v2}, z);
                row.empirical =
                    moment_root(active ? cell.agg.aoi_moments_a : cell.agg.aoi_moments_p, z);
                row.mismatch = report::mismatch_fraction(row.theoretical, row.empirical);
                track_worst(result.worst, z, active, row.mismatch);
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// s = 1 optimality validation
// ---------------------------------------------------------------------------

OptimalityResult run_optimality(const cfg::ExperimentConfig& config) {
    const NetworkShape shape = config.shape;
    validate(shape);
    const int threads = resolve_threads(config.threads);
    const std::uint64_t seed = seed_or_default(config, "optimality");
    const int zm = max_z(config.z_list);
    const int n = shape.users_per_cluster;

    std::vector<double> r_grid = config.r_list;
    if (r_grid.empty()) {
        const double r_max = n > 1 ? 1.0 / (n - 1) : 0.9;
        for (int j = 1;; ++j) {
            const double r = j * config.r_step;
            if (r > r_max + 1e-12) break;
            r_grid.push_back(r);
        }
    }
    const int s_cells = 100; // s in {0.01, ..., 1.00}

    struct Cell {
        double r;
        double s;
        sim::RunStats agg;
    };
    std::vector<Cell> cells;
    for (double r : r_grid)
        for (int j = 1; j <= s_cells; ++j) cells.push_back(Cell{r, j / 100.0, {}});

    parallel_for(static_cast<long long>(cells.size()), threads, [&](long long i) {
        Cell& cell = cells[static_cast<std::size_t>(i)];
        sim::SimConfig sc{shape, sim::TwoStatePolicy{cell.r, cell.s}, config.slots, config.runs,
                          seed, Objective{0.5, 1}, zm};
        cell.agg = simulate(sc, 1).aggregate;
    });

    OptimalityResult result;
    result.notes.push_back("shape=" + shape_tag(shape) + " s-grid=0.01..1.00 step 0.01");
    {
        std::ostringstream grid_note;
        grid_note << "r-grid=";
        for (double r : r_grid) grid_note << short_num(r) << ' ';
        result.notes.push_back(grid_note.str());
    }
    result.notes.push_back("rng=" + std::string(rng::kAlgorithmId));

    int active_cells = 0;
    int active_s1_wins = 0;
    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        for (int z : config.z_list) {
            for (bool active : {true, false}) {
                double best_value = std::numeric_limits<double>::infinity();
                double best_s = 0.0;
                double value_at_s1 = kNaN;
                for (int j = 1; j <= s_cells; ++j) {
                    const Cell& cell = cells[ri * s_cells + static_cast<std::size_t>(j - 1)];
                    const double value =
                        moment_root(active ? cell.agg.aoi_moments_a : cell.agg.aoi_moments_p, z);
                    if (value < best_value || (value == best_value && cell.s > best_s)) {
                        best_value = value;
                        best_s = cell.s;
                    }
                    if (j == s_cells) value_at_s1 = value;
                }
                const double gap = (value_at_s1 - best_value) / best_value;
                report::Row row;
                row.experiment = active ? "optimality:active" : "optimality:passive";
                row.c = shape.clusters;
                row.n = shape.users_per_cluster;
                row.w = kNaN;
                row.z = z;
                row.policy = "two-state";
                row.param1 = r_grid[ri];
                row.param2 = best_s;
                row.theoretical = value_at_s1;
                row.empirical = best_value;
                row.mismatch = gap;
                row.f_value = kNaN;
                row.seed = seed;
                row.runs = config.runs;
                row.slots = config.slots;
                row.rng_id = rng::kAlgorithmId;
                result.rows.push_back(row);
                if (active) {
                    result.worst_active_gap = std::max(result.worst_active_gap, gap);
                    ++active_cells;
                    if (best_s == 1.0) ++active_s1_wins;
                } else if (best_s != 1.0) {
                    result.passive_best_always_s1 = false;
                }
            }
        }
    }
    result.s1_active_win_fraction =
        active_cells > 0 ? static_cast<double>(active_s1_wins) / active_cells : 0.0;
    return result;
}

// ---------------------------------------------------------------------------
// Policy comparison
// ---------------------------------------------------------------------------

CompareResult run_compare(const cfg::ExperimentConfig& config) {
    const NetworkShape shape = config.shape;
    validate(shape);
    const int threads = resolve_threads(config.threads);
    const std::uint64_t seed = seed_or_default(config, "compare");
    const int zm = max_z(config.z_list);
    const int n = shape.users_per_cluster;

    std::map<std::string, sim::RunStats> cache;
    auto evaluate = [&](const sim::PolicySpec& policy) -> const sim::RunStats& {
        std::ostringstream key;
        key << policy_name(policy);
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, sim::TwoStatePolicy>)
                    key << ':' << p.r << ':' << p.s;
                else if constexpr (std::is_same_v<T, sim::WagPolicy>)
                    key << ':' << p.r << ':' << p.h;
                else if constexpr (std::is_same_v<T, sim::SlottedAlohaPolicy>)
                    key << ':' << p.p;
                else if constexpr (std::is_same_v<T, sim::AgeThresholdAlohaPolicy>)
                    key << ':' << p.p << ':' << p.threshold;
                else
                    key << ':' << p.sequences.size();
            },
            policy);
        auto it = cache.find(key.str());
        if (it == cache.end()) {
            sim::SimConfig sc{shape, policy, config.slots, config.runs, seed, Objective{0.5, 1}, zm};
            it = cache.emplace(key.str(), simulate(sc, threads).aggregate).first;
        }
        return it->second;
    };

    CompareResult result;
    result.notes.push_back("shape=" + shape_tag(shape));
    result.notes.push_back("final-eval runs=" + std::to_string(config.runs) +
                           " slots=" + std::to_string(config.slots));
    result.notes.push_back("sweeps runs=" + std::to_string(config.sweep_runs) +
                           " slots=" + std::to_string(config.sweep_slots) +
                           " r_step=" + short_num(config.r_step) +
                           " h_max=" + std::to_string(config.h_max));
    result.notes.push_back("rng=" + std::string(rng::kAlgorithmId));

    sim::PreAssignedPolicy preassigned;
    bool have_sequences = false;
    if (!config.seq_file.empty()) {
        preassigned = sim::load_preassigned(config.seq_file, shape);
        have_sequences = true;
    } else {
        result.notes.push_back("preassigned column omitted: no sequence file supplied");
    }

    auto add_row = [&](double w, int z, const std::string& policy, double p1, double p2,
                       double theoretical, double empirical) {
        report::Row row;
        row.experiment = "compare";
        row.c = shape.clusters;
        row.n = shape.users_per_cluster;
        row.w = w;
        row.z = z;
        row.policy = policy;
        row.param1 = p1;
        row.param2 = p2;
        row.theoretical = theoretical;
        row.empirical = empirical;
        row.mismatch = std::isnan(theoretical)
                           ? kNaN
                           : report::mismatch_fraction(theoretical, empirical);
        row.f_value = empirical;
        row.seed = seed;
        row.runs = config.runs;
        row.slots = config.slots;
        row.rng_id = rng::kAlgorithmId;
        result.rows.push_back(row);
    };

    for (double w : config.w_list) {
        for (int z : config.z_list) {
            const Objective obj{w, z};

            const auto ts = twostate::optimize_two_state(shape, obj, 0.01, config.k_trunc);
            const double ts_f =
                f_from(evaluate(sim::TwoStatePolicy{ts.params.r, ts.params.s}), w, z);
            add_row(w, z, "two-state", ts.params.r, ts.params.s, ts.objective_value, ts_f);

            const auto wg = wag::optimize_wag(shape, obj, 0.01, config.h_max, config.k_trunc);
            const double wag_f = f_from(evaluate(sim::WagPolicy{wg.params.r, wg.params.h}), w, z);
            add_row(w, z, "wag", wg.params.r, wg.params.h, wg.objective_value, wag_f);

            const auto sweep = sim::sweep_wag_empirical(shape, obj, config.sweep_slots,
                                                        config.sweep_runs, seed, config.r_step,
                                                        config.h_max, threads);
            const double opt_wag_f =
                f_from(evaluate(sim::WagPolicy{sweep.params.r, sweep.params.h}), w, z);
            add_row(w, z, "optimal-wag", sweep.params.r, sweep.params.h, kNaN, opt_wag_f);

            const double aloha_f = f_from(evaluate(sim::SlottedAlohaPolicy{1.0 / n}), w, z);
            add_row(w, z, "aloha", 1.0 / n, kNaN, kNaN, aloha_f);

            const auto aloha_sweep = sim::sweep_optimal_aloha(
                shape, obj, config.sweep_slots, config.sweep_runs, seed, config.p_step, threads);
            const double opt_aloha_f =
                f_from(evaluate(sim::SlottedAlohaPolicy{aloha_sweep.p_star}), w, z);
            add_row(w, z, "optimal-aloha", aloha_sweep.p_star, kNaN, kNaN, opt_aloha_f);

            const double ata_p = std::min(1.0, 4.69 / n);
            const double ata_thr = 2.2 * n;
            const double ata_f =
                f_from(evaluate(sim::AgeThresholdAlohaPolicy{ata_p, ata_thr}), w, z);
            add_row(w, z, "ata", ata_p, ata_thr, kNaN, ata_f);

            if (have_sequences) {
                const double pre_f = f_from(evaluate(preassigned), w, z);
                add_row(w, z, "preassigned",
                        static_cast<double>(preassigned.sequences.front().size()), kNaN, kNaN,
                        pre_f);
            }

            if (wag_f > aloha_f || wag_f > opt_aloha_f || wag_f > ata_f)
                result.wag_beats_baselines = false;
            result.worst_wag_vs_optimal =
                std::max(result.worst_wag_vs_optimal, wag_f / opt_wag_f);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Efficiency: formula-based WaG vs budget-matched WaG_R
// ---------------------------------------------------------------------------

EfficiencyResult run_efficiency(const cfg::ExperimentConfig& config) {
    const NetworkShape shape = config.shape;
    validate(shape);
    const int threads = resolve_threads(config.threads);
    const std::uint64_t seed = seed_or_default(config, "efficiency");
    const int zm = max_z(config.z_list);
    const int users = shape.clusters * shape.users_per_cluster;

    EfficiencyResult result;
    long long cells = 0;
    for (int j = 1; j * config.r_step < 1.0 - config.r_step / 2.0; ++j) ++cells;
    cells *= config.h_max;

    // Budget: slots per WaG_R cell-run, matching the analytic optimization's
    // measured wall time unless pinned in the config.
    double t_analytic = 0.0;
    {
        const auto start = Clock::now();
        (void)wag::optimize_wag(shape, Objective{config.w_list.front(), config.z_list.front()},
                                config.r_step, config.h_max, config.k_trunc);
        t_analytic = std::chrono::duration<double>(Clock::now() - start).count();
    }
    long long budget = config.budget;
    double slot_rate = 0.0; // network slots per second
    {
        const long long probe_slots = 20000;
        sim::SimConfig sc{shape, sim::WagPolicy{0.3, 2}, probe_slots, 1, seed, Objective{0.5, 1}, zm};
        const auto start = Clock::now();
        (void)sim::simulate_run(sc, 0);
        const double dt = std::chrono::duration<double>(Clock::now() - start).count();
        slot_rate = probe_slots / std::max(dt, 1e-9);
    }
    if (budget <= 0) {
        budget = std::max<long long>(
            1, static_cast<long long>(t_analytic * slot_rate / (cells * config.sweep_runs)));
        result.notes.push_back("budget derived from measured runtime; pin 'budget' for "
                               "byte-stable reruns");
    }
    result.budget_used = budget;
    result.low_confidence = budget * config.sweep_runs < 1000;
    result.notes.push_back("shape=" + shape_tag(shape) + " budget-slots-per-cell-run=" +
                           std::to_string(budget) + " sweep_runs=" +
                           std::to_string(config.sweep_runs));
    if (result.low_confidence)
        result.notes.push_back("low-confidence: WaG_R budget below 1000 slots per cell");
    result.notes.push_back("rng=" + std::string(rng::kAlgorithmId));

    double sweep_seconds = 0.0;
    for (double w : config.w_list) {
        for (int z : config.z_list) {
            const Objective obj{w, z};
            const auto analytic = wag::optimize_wag(shape, obj, config.r_step, config.h_max,
                                                    config.k_trunc);
            const auto start = Clock::now();
            const auto wag_r = sim::sweep_wag_empirical(shape, obj, budget, config.sweep_runs,
                                                        seed, config.r_step, config.h_max, threads);
            sweep_seconds += std::chrono::duration<double>(Clock::now() - start).count();

            sim::SimConfig eval_a{shape, sim::WagPolicy{analytic.params.r, analytic.params.h},
                                  config.slots, config.runs, seed, obj, zm};
            sim::SimConfig eval_r{shape, sim::WagPolicy{wag_r.params.r, wag_r.params.h},
                                  config.slots, config.runs, seed, obj, zm};
            const double f_wag = f_from(simulate(eval_a, threads).aggregate, w, z);
            const double f_wag_r = f_from(simulate(eval_r, threads).aggregate, w, z);

            report::Row row;
            row.experiment = "efficiency";
            row.c = shape.clusters;
            row.n = shape.users_per_cluster;
            row.w = w;
            row.z = z;
            row.policy = "wag-vs-wagr";
            row.param1 = static_cast<double>(budget);
            row.param2 = config.sweep_runs;
            row.theoretical = f_wag;
            row.empirical = f_wag_r;
            row.mismatch = report::mismatch_fraction(f_wag, f_wag_r);
            row.f_value = f_wag / f_wag_r;
            row.seed = seed;
            row.runs = config.runs;
            row.slots = config.slots;
            row.rng_id = rng::kAlgorithmId;
            result.rows.push_back(row);
        }
    }

    const double paper_sweep_slots = static_cast<double>(cells) * 100.0 * 100000.0;
    result.runtime_lines.push_back("analytic optimization seconds: " + std::to_string(t_analytic));
    result.runtime_lines.push_back("WaG_R sweep seconds (all objectives): " +
                                   std::to_string(sweep_seconds));
    result.runtime_lines.push_back(
        "network slots per second (measured): " + std::to_string(slot_rate) + " (" +
        std::to_string(users) + " users)");
    result.runtime_lines.push_back(
        "projected full-fidelity sweep / analytic runtime ratio: " +
        std::to_string(paper_sweep_slots / slot_rate / std::max(t_analytic, 1e-9)));
    return result;
}

// ---------------------------------------------------------------------------
// Lemma checks
// ---------------------------------------------------------------------------

LemmaResult run_lemma_checks(const cfg::ExperimentConfig& config) {
    const NetworkShape shape = config.shape;
    validate(shape);
    twostate::LemmaGrid grid;
    for (int j = 1; j <= 19; ++j) grid.lambdas.push_back(j * 0.05);
    grid.thetas = {-0.9, -0.6, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5};

    LemmaResult result;
    result.report = twostate::lemma_checks(shape, Objective{config.w_list.front(),
                                                            config.z_list.front()},
                                           grid);
    auto add = [&](const std::string& claim, bool ok, double margin) {
        report::Row row;
        row.experiment = "lemma-check";
        row.c = shape.clusters;
        row.n = shape.users_per_cluster;
        row.w = config.w_list.front();
        row.z = config.z_list.front();
        row.policy = claim;
        row.param1 = ok ? 1.0 : 0.0;
        row.param2 = kNaN;
        row.theoretical = kNaN;
        row.empirical = kNaN;
        row.mismatch = kNaN;
        row.f_value = margin;
        row.seed = 0;
        row.runs = 0;
        row.slots = 0;
        row.rng_id = "-";
        result.rows.push_back(row);
    };
    add("positive-theta-never-helps", result.report.positive_theta_never_helps,
        result.report.worst_positive_theta_margin);
    add("lambda-monotone-above-1/N", result.report.lambda_monotone_above_inverse_n,
        result.report.worst_lambda_monotonicity_margin);
    add("alpha-exceeds-1/N", result.report.alpha_exceeds_inverse_n,
        result.report.worst_alpha_margin);
    add("beta-exceeds-1/N", result.report.beta_exceeds_inverse_n, result.report.worst_beta_margin);
    return result;
}

// ---------------------------------------------------------------------------
// Deterministic reference checks
// ---------------------------------------------------------------------------

OracleChecks run_oracle_checks(int k_trunc) {
    OracleChecks checks;
    auto add_row = [&](const std::string& what, const NetworkShape& shape, double p1, double p2,
                       double closed, double exact) {
        report::Row row;
        row.experiment = "validate-oracle";
        row.c = shape.clusters;
        row.n = shape.users_per_cluster;
        row.w = kNaN;
        row.z = 0;
        row.policy = what;
        row.param1 = p1;
        row.param2 = p2;
        row.theoretical = closed;
        row.empirical = exact;
        row.mismatch = std::abs(closed - exact);
        row.f_value = kNaN;
        row.seed = 0;
        row.runs = 0;
        row.slots = 0;
        row.rng_id = "-";
        checks.rows.push_back(row);
    };

    // Two-state closed forms vs the exact chain.
    const std::vector<NetworkShape> shapes{{1, 1}, {1, 2}, {2, 4}};
    for (double lambda : {0.1, 0.3, 0.5}) {
        for (double theta : {-0.1, 0.0, 0.3}) {
            const auto params = twostate::from_lambda_theta(twostate::LambdaTheta{lambda, theta});
            const auto chain = oracle::two_state_chain(params.r, params.s);
            for (const NetworkShape& shape : shapes) {
                const auto lt = twostate::LambdaTheta{lambda, theta};
                const ActivePassive means = twostate::two_state_means(lt, shape);
                const ActivePassive vars = twostate::two_state_variances(lt, shape, k_trunc);
                const auto exact = oracle::exact_mean_variance(chain, shape, k_trunc);
                const double mean_err = std::max(std::abs(means.active - exact.m_a),
                                                 std::abs(means.passive - exact.m_p));
                const double var_err = std::max(std::abs(vars.active - exact.v_a2),
                                                std::abs(vars.passive - exact.v_p2));
                checks.worst_two_state_mean_err =
                    std::max(checks.worst_two_state_mean_err, mean_err);
                checks.worst_two_state_var_err = std::max(checks.worst_two_state_var_err, var_err);
                add_row("two-state-mean", shape, lambda, theta, means.active, exact.m_a);
                add_row("two-state-variance", shape, lambda, theta, vars.active, exact.v_a2);
            }
        }
    }
    checks.two_state_ok =
        checks.worst_two_state_mean_err < 1e-9 && checks.worst_two_state_var_err < 1e-8;

    // WaG closed forms vs the exact chain.
    for (double r : {0.1, 0.3, 0.5, 0.7}) {
        for (int h : {0, 1, 2, 4}) {
            const wag::WagParams params{r, h};
            const auto chain = oracle::wag_chain(r, h);
            for (const NetworkShape& shape : shapes) {
                const ActivePassive means = wag::wag_means(params, shape);
                const ActivePassive vars = wag::wag_variances(params, shape, k_trunc);
                const auto exact = oracle::exact_mean_variance(chain, shape, k_trunc);
                const double mean_err = std::max(std::abs(means.active - exact.m_a),
                                                 std::abs(means.passive - exact.m_p));
                const double var_err = std::max(std::abs(vars.active - exact.v_a2),
                                                std::abs(vars.passive - exact.v_p2));
                checks.worst_wag_mean_err = std::max(checks.worst_wag_mean_err, mean_err);
                checks.worst_wag_var_err = std::max(checks.worst_wag_var_err, var_err);
                add_row("wag-mean", shape, r, h, means.active, exact.m_a);
                add_row("wag-variance", shape, r, h, vars.active, exact.v_a2);
            }
        }
    }
    checks.wag_ok = checks.worst_wag_mean_err < 1e-12 && checks.worst_wag_var_err < 1e-8;

    // phi closed form vs its one-step recursion.
    for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (int h = 0; h <= 6; ++h) {
            const wag::WagParams params{r, h};
            const wag::PhiCache cache(params, 300);
            for (int k = 1; k <= 300; ++k) {
                const double err = std::abs(wag::wag_phi(k, params) - cache.phi(k));
                checks.worst_phi_err = std::max(checks.worst_phi_err, err);
            }
        }
    }
    checks.phi_ok = checks.worst_phi_err < 1e-12;

    // H=0 pipeline reduction to the two-state model at s = 1.
    for (double r : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        const wag::WagParams wp{r, 0};
        const twostate::LambdaTheta lt =
            twostate::to_lambda_theta(twostate::TwoStateParams{r, 1.0});
        for (const NetworkShape& shape : shapes) {
            const ActivePassive wm = wag::wag_means(wp, shape);
            const ActivePassive tm = twostate::two_state_means(lt, shape);
            const ActivePassive wv = wag::wag_variances(wp, shape, k_trunc);
            const ActivePassive tv = twostate::two_state_variances(lt, shape, k_trunc);
            double err = std::max({std::abs(wm.active - tm.active),
                                   std::abs(wm.passive - tm.passive),
                                   std::abs(wv.active - tv.active),
                                   std::abs(wv.passive - tv.passive)});
            const AoiSummary ws = wag::wag_moments(wp, shape, Objective{0.5, 2}, k_trunc);
            const AoiSummary tss =
                twostate::two_state_moments(twostate::TwoStateParams{r, 1.0}, shape,
                                            Objective{0.5, 2}, k_trunc);
            err = std::max(err, std::abs(ws.objective_value - tss.objective_value));
            checks.worst_reduction_err = std::max(checks.worst_reduction_err, err);
            add_row("h0-reduction", shape, r, 0.0, wv.active, tv.active);
        }
    }
    checks.reduction_ok = checks.worst_reduction_err < 1e-9;
    return checks;
}

ApproxErrorChecks run_exact_approx_error() {
    ApproxErrorChecks checks;
    const std::vector<NetworkShape> shapes{{1, 1}, {2, 4}};
    auto add_row = [&](const std::string& what, const NetworkShape& shape, double p1, double p2,
                       int z, bool active, double approx, double exact) {
        report::Row row;
        row.experiment = active ? "approx-error:active" : "approx-error:passive";
        row.c = shape.clusters;
        row.n = shape.users_per_cluster;
        row.w = kNaN;
        row.z = z;
        row.policy = what;
        row.param1 = p1;
        row.param2 = p2;
        row.theoretical = approx;
        row.empirical = exact;
        row.mismatch = report::mismatch_fraction(approx, exact);
        row.f_value = kNaN;
        row.seed = 0;
        row.runs = 0;
        row.slots = 0;
        row.rng_id = "-";
        checks.rows.push_back(row);
    };

    for (const NetworkShape& shape : shapes) {
        for (double s : {1.0, 0.8}) {
            for (double r : two_state_r_grid(shape, s, {}, 4)) {
                const auto lt = twostate::to_lambda_theta(twostate::TwoStateParams{r, s});
                const ActivePassive means = twostate::two_state_means(lt, shape);
                const ActivePassive vars = twostate::two_state_variances(lt, shape, 1000);
                const auto exact =
                    oracle::exact_aoi_moments(oracle::two_state_chain(r, s), shape, 3);
                for (int z = 1; z <= 3; ++z) {
                    for (bool active : {true, false}) {
                        const double m = active ? means.active : means.passive;
                        const double v2 = active ? vars.active : vars.passive;
                        const double approx = aoi_root(SecondOrderPoint{m, v2}, z);
                        const double exact_root =
                            moment_root(active ? exact.active : exact.passive, z);
                        track_worst(checks.worst_two_state, z, active,
                                    report::mismatch_fraction(approx, exact_root));
                        add_row("two-state", shape, r, s, z, active, approx, exact_root);
                    }
                }
            }
        }
        for (double r : {0.3, 0.5}) {
            for (int h : {1, 2, 4}) {
                const wag::WagParams params{r, h};
                const ActivePassive means = wag::wag_means(params, shape);
                const ActivePassive vars = wag::wag_variances(params, shape, 1000);
                const auto exact = oracle::exact_aoi_moments(oracle::wag_chain(r, h), shape, 3);
                auto& worst = shape.clusters * shape.users_per_cluster == 1
                                  ? checks.worst_wag_single
                                  : checks.worst_wag_multi;
                for (int z = 1; z <= 3; ++z) {
                    for (bool active : {true, false}) {
                        const double m = active ? means.active : means.passive;
                        const double v2 = active ? vars.active : vars.passive;
                        const double approx = aoi_root(SecondOrderPoint{m, v2}, z);
                        const double exact_root =
                            moment_root(active ? exact.active : exact.passive, z);
                        track_worst(worst, z, active,
                                    report::mismatch_fraction(approx, exact_root));
                        add_row("wag", shape, r, h, z, active, approx, exact_root);
                    }
                }
            }
        }
    }
    return checks;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> chart_formats(const cfg::ExperimentConfig& config) {
    std::vector<std::string> out;
    if (config.format == "csv" || config.format == "both") out.push_back("csv");
    if (config.format == "svg" || config.format == "both") out.push_back("svg");
    if (out.empty()) throw ParameterError("format must be csv, svg, or both");
    return out;
}

/// Per-z mismatch series over the x column selector.
std::vector<report::Series> series_by_z(const std::vector<report::Row>& rows,
                                        double report::Row::*x_member) {
    std::set<int> zs;
    for (const auto& r : rows) zs.insert(r.z);
    std::vector<report::Series> series;
    for (int z : zs) {
        report::Series s;
        s.label = "z=" + std::to_string(z);
        for (const auto& r : rows)
            if (r.z == z && !std::isnan(r.mismatch)) {
                s.x.push_back(r.*x_member);
                s.y.push_back(r.mismatch);
            }
        series.push_back(std::move(s));
    }
    return series;
}

} // namespace

std::vector<std::string> emit_mismatch(const cfg::ExperimentConfig& config,
                                       const MismatchResult& result, const std::string& model) {
    fs::create_directories(config.out_dir);
    const auto formats = chart_formats(config);
    std::vector<std::string> files;

    // Group by (user type, fixed setting): s for two-state, r for wag.
    const bool is_wag = model == "wag";
    std::set<double> settings;
    for (const auto& r : result.rows) settings.insert(is_wag ? r.param1 : r.param2);
    for (double setting : settings) {
        for (bool active : {true, false}) {
            std::vector<report::Row> group;
            for (const auto& r : result.rows) {
                const double rs = is_wag ? r.param1 : r.param2;
                const bool ra = r.experiment.find(":active") != std::string::npos;
                if (rs == setting && ra == active) group.push_back(r);
            }
            if (group.empty()) continue;
            const std::string base = config.out_dir + "/mismatch_" + model + "_" +
                                     shape_tag(config.shape) + "_" +
                                     (is_wag ? "r" : "s") + short_num(setting) + "_" +
                                     (active ? "active" : "passive");
            for (const std::string& format : formats) {
                if (format == "csv") {
                    report::write_csv(base + ".csv", group, result.notes);
                    files.push_back(base + ".csv");
                } else {
                    report::write_line_chart(
                        base + ".svg",
                        model + " mismatch " + shape_tag(config.shape) + " " +
                            (active ? "active" : "passive") + " " + (is_wag ? "r=" : "s=") +
                            short_num(setting),
                        is_wag ? "H" : "r", "mismatch",
                        series_by_z(group, is_wag ? &report::Row::param2 : &report::Row::param1));
                    files.push_back(base + ".svg");
                }
            }
        }
    }
    return files;
}

std::vector<std::string> emit_optimality(const cfg::ExperimentConfig& config,
                                         const OptimalityResult& result) {
    fs::create_directories(config.out_dir);
    const auto formats = chart_formats(config);
    std::vector<std::string> files;
    const std::string base = config.out_dir + "/optimality_" + shape_tag(config.shape);
    for (const std::string& format : formats) {
        if (format == "csv") {
            report::write_csv(base + ".csv", result.rows, result.notes);
            files.push_back(base + ".csv");
        } else {
            for (bool active : {true, false}) {
                std::vector<report::Row> group;
                for (const auto& r : result.rows)
                    if ((r.experiment.find(":active") != std::string::npos) == active)
                        group.push_back(r);
                const std::string file =
                    base + (active ? "_active.svg" : "_passive.svg");
                report::write_line_chart(file,
                                         "s=1 gap " + shape_tag(config.shape) + " " +
                                             (active ? "active" : "passive"),
                                         "r", "relative gap", series_by_z(group, &report::Row::param1));
                files.push_back(file);
            }
        }
    }
    return files;
}

std::vector<std::string> emit_compare(const cfg::ExperimentConfig& config,
                                      const CompareResult& result) {
    fs::create_directories(config.out_dir);
    const auto formats = chart_formats(config);
    std::vector<std::string> files;
    const std::string base = config.out_dir + "/compare_" + shape_tag(config.shape);
    for (const std::string& format : formats) {
        if (format == "csv") {
            report::write_csv(base + ".csv", result.rows, result.notes);
            files.push_back(base + ".csv");
        } else {
            std::set<double> ws;
            for (const auto& r : result.rows) ws.insert(r.w);
            for (double w : ws) {
                std::vector<std::string> policies;
                for (const auto& r : result.rows)
                    if (r.w == w &&
                        std::find(policies.begin(), policies.end(), r.policy) == policies.end())
                        policies.push_back(r.policy);
                std::set<int> zs;
                for (const auto& r : result.rows)
                    if (r.w == w) zs.insert(r.z);
                std::vector<report::BarGroup> groups;
                for (int z : zs) {
                    report::BarGroup g;
                    g.label = "z=" + std::to_string(z);
                    for (const std::string& policy : policies) {
                        double value = kNaN;
                        for (const auto& r : result.rows)
                            if (r.w == w && r.z == z && r.policy == policy) value = r.f_value;
                        g.values.push_back(value);
                    }
                    groups.push_back(std::move(g));
                }
                const std::string file = base + "_w" + short_num(w) + ".svg";
                report::write_bar_chart(file,
                                        "objective " + shape_tag(config.shape) + " w=" +
                                            short_num(w),
                                        policies, groups);
                files.push_back(file);
            }
        }
    }
    return files;
}

std::vector<std::string> emit_efficiency(const cfg::ExperimentConfig& config,
                                         const EfficiencyResult& result) {
    fs::create_directories(config.out_dir);
    const auto formats = chart_formats(config);
    std::vector<std::string> files;
    const std::string base = config.out_dir + "/efficiency_" + shape_tag(config.shape);
    for (const std::string& format : formats) {
        if (format == "csv") {
            report::write_csv(base + ".csv", result.rows, result.notes);
            files.push_back(base + ".csv");
        } else {
            std::set<int> zs;
            std::set<double> ws;
            for (const auto& r : result.rows) {
                zs.insert(r.z);
                ws.insert(r.w);
            }
            std::vector<std::string> labels;
            for (double w : ws) labels.push_back("w=" + short_num(w));
            std::vector<report::BarGroup> groups;
            for (int z : zs) {
                report::BarGroup g;
                g.label = "z=" + std::to_string(z);
                for (double w : ws) {
                    double value = kNaN;
                    for (const auto& r : result.rows)
                        if (r.z == z && r.w == w) value = r.f_value;
                    g.values.push_back(value);
                }
                groups.push_back(std::move(g));
            }
            report::write_bar_chart(base + ".svg",
                                    "F(WaG)/F(WaG_R) " + shape_tag(config.shape), labels, groups);
            files.push_back(base + ".svg");
        }
    }
    // Wall-clock diagnostics live outside the deterministic CSV contract.
    const std::string runtime_file = base + "_runtime.txt";
    std::ofstream rt(runtime_file, std::ios::binary);
    for (const std::string& line : result.runtime_lines) rt << line << '\n';
    files.push_back(runtime_file);
    return files;
}

std::vector<std::string> emit_lemmas(const cfg::ExperimentConfig& config,
                                     const LemmaResult& result) {
    fs::create_directories(config.out_dir);
    std::vector<std::string> files;
    const std::string file = config.out_dir + "/lemmas_" + shape_tag(config.shape) + ".csv";
    report::write_csv(file, result.rows);
    files.push_back(file);
    return files;
}

std::vector<std::string> render_csv(const std::string& csv_file, const std::string& out_dir) {
    std::ifstream in(csv_file);
    if (!in) throw IoError("cannot open " + csv_file);
    std::vector<report::Row> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        parts.resize(16);
        report::Row r;
        auto num = [](const std::string& s) { return s.empty() ? kNaN : std::stod(s); };
        r.experiment = parts[0];
        r.c = static_cast<int>(num(parts[1]));
        r.n = static_cast<int>(num(parts[2]));
        r.w = num(parts[3]);
        r.z = static_cast<int>(num(parts[4]));
        r.policy = parts[5];
        r.param1 = num(parts[6]);
        r.param2 = num(parts[7]);
        r.theoretical = num(parts[8]);
        r.empirical = num(parts[9]);
        r.mismatch = num(parts[10]);
        r.f_value = num(parts[11]);
        r.rng_id = parts[15];
        rows.push_back(r);
    }
    if (rows.empty()) throw IoError("no data rows in " + csv_file);

    cfg::ExperimentConfig config;
    config.out_dir = out_dir;
    config.format = "svg";
    config.shape = NetworkShape{rows.front().c, rows.front().n};
    const std::string& experiment = rows.front().experiment;
    if (experiment.rfind("mismatch-two-state", 0) == 0) {
        MismatchResult result;
        result.rows = rows;
        return emit_mismatch(config, result, "two-state");
    }
    if (experiment.rfind("mismatch-wag", 0) == 0) {
        MismatchResult result;
        result.rows = rows;
        return emit_mismatch(config, result, "wag");
    }
    if (experiment.rfind("optimality", 0) == 0) {
        OptimalityResult result;
        result.rows = rows;
        return emit_optimality(config, result);
    }
    if (experiment == "compare") {
        CompareResult result;
        result.rows = rows;
        return emit_compare(config, result);
    }
    if (experiment == "efficiency") {
        EfficiencyResult result;
        result.rows = rows;
        return emit_efficiency(config, result);
    }
    throw ParameterError("no chart renderer for experiment '" + experiment + "'");
}

} // namespace aoi::experiments
