// aoikit — AoI analysis and simulation toolkit for random access networks.
//
// Subcommands: approx, analyze, optimize, simulate, sweep, validate, compare,
// efficiency, report. A flat key=value config file (--config) supplies
// defaults; explicitly passed flags win. See README.md for the full key list.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aoi/config.hpp"
#include "aoi/experiments.hpp"
#include "aoi/markov_oracle.hpp"
#include "aoi/parallel.hpp"
#include "aoi/rng.hpp"
#include "aoi/second_order.hpp"
#include "aoi/sim.hpp"
#include "aoi/two_state.hpp"
#include "aoi/validation.hpp"
#include "aoi/wag.hpp"

namespace {

using aoi::NetworkShape;
using aoi::Objective;

struct CommonFlags {
    std::string config_file;
    std::string out_dir;
    std::string format;
    std::string seq_file;
    long long seed = -1;
    int threads = -1;
    int c = -1, n = -1;
    double w = -1.0;
    std::string z_list, w_list, s_list, r_list, h_list;
    long long slots = -1, budget = -1, sweep_slots = -1;
    int runs = -1, sweep_runs = -1, h_max = -1, k_trunc = -1;
    double r_step = -1.0, p_step = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_file, "key = value config file");
    cmd->add_option("--C", f.c, "cluster count");
    cmd->add_option("--N", f.n, "active users per cluster");
    cmd->add_option("--w", f.w_list, "objective weight(s), comma separated");
    cmd->add_option("--z", f.z_list, "moment order(s), comma separated or a..b");
    cmd->add_option("--s-grid", f.s_list, "two-state s grid for the mismatch study");
    cmd->add_option("--r-grid", f.r_list, "explicit r grid");
    cmd->add_option("--H-grid", f.h_list, "explicit H grid");
    cmd->add_option("--slots", f.slots, "slots per run");
    cmd->add_option("--runs", f.runs, "independent runs");
    cmd->add_option("--seed", f.seed, "base RNG seed (default: 42 + experiment hash)");
    cmd->add_option("--r-step", f.r_step, "r grid precision");
    cmd->add_option("--p-step", f.p_step, "ALOHA sweep precision");
    cmd->add_option("--h-max", f.h_max, "largest H in grid searches");
    cmd->add_option("--k-trunc", f.k_trunc, "variance series truncation");
    cmd->add_option("--sweep-slots", f.sweep_slots, "slots per run inside empirical sweeps");
    cmd->add_option("--sweep-runs", f.sweep_runs, "runs per cell inside empirical sweeps");
    cmd->add_option("--budget", f.budget, "WaG_R slots per cell-run (0 = measure)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--format", f.format, "csv | svg | both");
    cmd->add_option("--seq-file", f.seq_file, "pre-assigned schedule file");
    cmd->add_option("--threads", f.threads, "worker threads (or env AOI_THREADS)");
}

aoi::cfg::ExperimentConfig merge_config(const CommonFlags& f, const std::string& experiment) {
    aoi::cfg::KeyValues kv;
    if (!f.config_file.empty()) kv = aoi::cfg::KeyValues::parse_file(f.config_file);
    kv.set("experiment", experiment);
    if (f.c >= 0) kv.set("C", std::to_string(f.c));
    if (f.n >= 0) kv.set("N", std::to_string(f.n));
    if (!f.w_list.empty()) kv.set("w", f.w_list);
    if (!f.z_list.empty()) kv.set("z", f.z_list);
    if (!f.s_list.empty()) kv.set("s", f.s_list);
    if (!f.r_list.empty()) kv.set("r", f.r_list);
    if (!f.h_list.empty()) kv.set("H", f.h_list);
    if (f.slots >= 0) kv.set("slots", std::to_string(f.slots));
    if (f.runs >= 0) kv.set("runs", std::to_string(f.runs));
    if (f.seed >= 0) kv.set("seed", std::to_string(f.seed));
    if (f.r_step >= 0) kv.set("r_step", std::to_string(f.r_step));
    if (f.p_step >= 0) kv.set("p_step", std::to_string(f.p_step));
    if (f.h_max >= 0) kv.set("h_max", std::to_string(f.h_max));
    if (f.k_trunc >= 0) kv.set("k_trunc", std::to_string(f.k_trunc));
    if (f.sweep_slots >= 0) kv.set("sweep_slots", std::to_string(f.sweep_slots));
    if (f.sweep_runs >= 0) kv.set("sweep_runs", std::to_string(f.sweep_runs));
    if (f.budget >= 0) kv.set("budget", std::to_string(f.budget));
    if (!f.out_dir.empty()) kv.set("out", f.out_dir);
    if (!f.format.empty()) kv.set("format", f.format);
    if (!f.seq_file.empty()) kv.set("seq_file", f.seq_file);
    if (f.threads >= 0) kv.set("threads", std::to_string(f.threads));
    return aoi::cfg::experiment_config_from(kv);
}

void print_summary(const aoi::AoiSummary& summary, const Objective& obj) {
    if (obj.w > 0.0) std::printf("aoi_active_root   %.10g\n", summary.aoi_active);
    if (obj.w < 1.0) std::printf("aoi_passive_root  %.10g\n", summary.aoi_passive);
    std::printf("objective         %.10g\n", summary.objective_value);
}

int print_outcomes(const std::vector<aoi::validation::Outcome>& outcomes) {
    bool all = true;
    for (const auto& o : outcomes) {
        std::printf("%s  %s (%s)\n", o.passed ? "PASS" : "FAIL", o.name.c_str(),
                    o.detail.c_str());
        all = all && o.passed;
    }
    return all ? 0 : 1;
}

aoi::sim::PolicySpec make_policy(const std::string& kind, double r, double s, int h, double p,
                                 double threshold, const std::string& seq_file,
                                 bool random_offsets, const NetworkShape& shape) {
    if (kind == "two-state") return aoi::sim::TwoStatePolicy{r, s};
    if (kind == "wag") return aoi::sim::WagPolicy{r, h};
    if (kind == "aloha") return aoi::sim::SlottedAlohaPolicy{p};
    if (kind == "ata") return aoi::sim::AgeThresholdAlohaPolicy{p, threshold};
    if (kind == "preassigned") {
        if (seq_file.empty()) throw aoi::ParameterError("preassigned policy needs --seq-file");
        return aoi::sim::load_preassigned(seq_file, shape, random_offsets);
    }
    throw aoi::ParameterError("unknown policy '" + kind + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AoI analysis and simulation toolkit for random access networks"};
    app.require_subcommand(1);

    // ---- approx ----
    double ap_ma = 0.5, ap_va2 = 0.0, ap_mp = -1.0, ap_vp2 = 0.0, ap_w = 1.0;
    int ap_z = 1;
    auto* approx = app.add_subcommand("approx", "evaluate the second-order AoI approximation");
    approx->add_option("--ma", ap_ma, "active mean")->required();
    approx->add_option("--va2", ap_va2, "active temporal variance");
    approx->add_option("--mp", ap_mp, "passive mean");
    approx->add_option("--vp2", ap_vp2, "passive temporal variance");
    approx->add_option("--z", ap_z, "moment order");
    approx->add_option("--w", ap_w, "active weight");

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "closed-form means/variances/moments");
    analyze->require_subcommand(1);
    CommonFlags an_flags;
    double an_r = 0.2, an_s = 1.0;
    int an_h = 1;
    auto* an_ts = analyze->add_subcommand("two-state", "two-state model");
    add_common(an_ts, an_flags);
    an_ts->add_option("--r", an_r, "Idle->TX probability");
    an_ts->add_option("--s", an_s, "TX->Idle probability");
    auto* an_wag = analyze->add_subcommand("wag", "Wait-and-Go model");
    add_common(an_wag, an_flags);
    an_wag->add_option("--r", an_r, "Idle->TX probability");
    an_wag->add_option("--H", an_h, "wait slots");

    // ---- optimize ----
    auto* optimize = app.add_subcommand("optimize", "grid-search optimal parameters");
    optimize->require_subcommand(1);
    CommonFlags op_flags;
    auto* op_ts = optimize->add_subcommand("two-state", "s=1 line search");
    add_common(op_ts, op_flags);
    auto* op_wag = optimize->add_subcommand("wag", "(r, H) grid search");
    add_common(op_wag, op_flags);

    // ---- simulate ----
    CommonFlags sim_flags;
    std::string sim_policy = "two-state";
    double sim_r = 0.2, sim_s = 1.0, sim_p = 0.125, sim_threshold = 0.0;
    int sim_h = 1;
    bool sim_random_offsets = false;
    bool sim_per_run = false;
    auto* simulate_cmd = app.add_subcommand("simulate", "seeded Monte-Carlo simulation");
    add_common(simulate_cmd, sim_flags);
    simulate_cmd->add_option("--policy", sim_policy,
                             "two-state | wag | aloha | ata | preassigned");
    simulate_cmd->add_option("--r", sim_r, "policy r");
    simulate_cmd->add_option("--s", sim_s, "two-state s");
    simulate_cmd->add_option("--H", sim_h, "WaG wait slots");
    simulate_cmd->add_option("--p", sim_p, "ALOHA/ATA transmit probability");
    simulate_cmd->add_option("--threshold", sim_threshold, "ATA age threshold");
    simulate_cmd->add_flag("--random-offsets", sim_random_offsets,
                           "random cyclic offsets for pre-assigned schedules");
    simulate_cmd->add_flag("--per-run", sim_per_run, "print per-run statistics");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "empirical parameter sweeps");
    sweep->require_subcommand(1);
    CommonFlags sw_flags;
    auto* sw_aloha = sweep->add_subcommand("aloha", "optimal ALOHA probability");
    add_common(sw_aloha, sw_flags);
    auto* sw_wag = sweep->add_subcommand("wag", "empirical WaG (r, H)");
    add_common(sw_wag, sw_flags);

    // ---- validate ----
    auto* validate_cmd = app.add_subcommand("validate", "acceptance-style checks");
    validate_cmd->require_subcommand(1);
    CommonFlags va_flags;
    std::string va_model = "two-state";
    bool va_quick = false;
    auto* va_mismatch = validate_cmd->add_subcommand("mismatch", "approximation mismatches");
    add_common(va_mismatch, va_flags);
    va_mismatch->add_option("--model", va_model, "two-state | wag");
    va_mismatch->add_flag("--quick", va_quick, "reduced protocol (smoke only)");
    auto* va_optimality = validate_cmd->add_subcommand("optimality", "s=1 optimality");
    add_common(va_optimality, va_flags);
    va_optimality->add_flag("--quick", va_quick);
    auto* va_lemmas = validate_cmd->add_subcommand("lemmas", "structural lemma checks");
    add_common(va_lemmas, va_flags);
    auto* va_oracle = validate_cmd->add_subcommand("oracle", "closed forms vs exact chains");
    add_common(va_oracle, va_flags);
    auto* va_all = validate_cmd->add_subcommand("all", "every acceptance gate");
    add_common(va_all, va_flags);
    va_all->add_flag("--quick", va_quick);

    // ---- compare / efficiency ----
    CommonFlags cmp_flags;
    auto* compare_cmd = app.add_subcommand("compare", "policy comparison study");
    add_common(compare_cmd, cmp_flags);
    CommonFlags eff_flags;
    auto* efficiency_cmd = app.add_subcommand("efficiency", "WaG vs budget-matched WaG_R");
    add_common(efficiency_cmd, eff_flags);

    // ---- report ----
    std::string rep_in, rep_out = "out";
    auto* report_cmd = app.add_subcommand("report", "re-render SVG charts from a CSV");
    report_cmd->add_option("--in", rep_in, "CSV produced by this tool")->required();
    report_cmd->add_option("--out", rep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*approx) {
            const Objective obj{ap_mp >= 0.0 ? ap_w : 1.0, ap_z};
            aoi::validate(obj);
            aoi::AoiSummary summary{std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN(), 0.0};
            if (obj.w > 0.0) {
                summary.aoi_active = aoi::aoi_root(aoi::SecondOrderPoint{ap_ma, ap_va2}, ap_z);
                summary.objective_value += obj.w * summary.aoi_active;
            }
            if (obj.w < 1.0) {
                summary.aoi_passive = aoi::aoi_root(aoi::SecondOrderPoint{ap_mp, ap_vp2}, ap_z);
                summary.objective_value += (1.0 - obj.w) * summary.aoi_passive;
            }
            print_summary(summary, obj);
            return 0;
        }

        if (*analyze) {
            const auto config = merge_config(an_flags, "analyze");
            const Objective obj{config.w_list.front(), config.z_list.front()};
            const NetworkShape shape = config.shape;
            if (*an_ts) {
                const aoi::twostate::TwoStateParams params{an_r, an_s};
                const auto lt = aoi::twostate::to_lambda_theta(params);
                const auto means = aoi::twostate::two_state_means(lt, shape);
                const auto vars = aoi::twostate::two_state_variances(lt, shape, config.k_trunc);
                std::printf("lambda %.10g  theta %.10g\n", lt.lambda, lt.theta);
                std::printf("m_a %.10g  v_a2 %.10g\n", means.active, vars.active);
                std::printf("m_p %.10g  v_p2 %.10g\n", means.passive, vars.passive);
                print_summary(aoi::twostate::two_state_moments(params, shape, obj, config.k_trunc),
                              obj);
            } else {
                const aoi::wag::WagParams params{an_r, an_h};
                const auto q = aoi::wag::wag_stationary(params);
                const auto means = aoi::wag::wag_means(params, shape);
                const auto vars = aoi::wag::wag_variances(params, shape, config.k_trunc);
                std::printf("q0 %.10g  q1 %.10g\n", q.q0, q.q1);
                std::printf("m_a %.10g  v_a2 %.10g\n", means.active, vars.active);
                std::printf("m_p %.10g  v_p2 %.10g\n", means.passive, vars.passive);
                print_summary(aoi::wag::wag_moments(params, shape, obj, config.k_trunc), obj);
            }
            return 0;
        }

        if (*optimize) {
            const auto config = merge_config(op_flags, "optimize");
            const Objective obj{config.w_list.front(), config.z_list.front()};
            if (*op_ts) {
                const auto best = aoi::twostate::optimize_two_state(config.shape, obj,
                                                                    config.r_step, config.k_trunc);
                std::printf("r_star %.10g\ns_star 1\nobjective %.10g\n", best.params.r,
                            best.objective_value);
            } else {
                const auto best = aoi::wag::optimize_wag(config.shape, obj, config.r_step,
                                                         config.h_max, config.k_trunc);
                std::printf("r_star %.10g\nH_star %d\nobjective %.10g\n", best.params.r,
                            best.params.h, best.objective_value);
            }
            return 0;
        }

        if (*simulate_cmd) {
            const auto config = merge_config(sim_flags, "simulate");
            aoi::sim::SimConfig sc;
            sc.shape = config.shape;
            sc.policy = make_policy(sim_policy, sim_r, sim_s, sim_h, sim_p, sim_threshold,
                                    config.seq_file, sim_random_offsets, config.shape);
            sc.slots = config.slots;
            sc.runs = config.runs;
            sc.seed = config.seed;
            sc.objective = Objective{config.w_list.front(), config.z_list.front()};
            sc.z_max = std::max(3, sc.objective.z);
            const auto result = aoi::sim::simulate(
                sc, config.threads > 0 ? config.threads : aoi::default_thread_count());
            const auto& agg = result.aggregate;
            std::printf("rng %s  seed %llu\n", aoi::rng::kAlgorithmId,
                        static_cast<unsigned long long>(sc.seed));
            std::printf("m_hat_a %.10g  v2_hat_a %.10g\n", agg.m_hat_a, agg.v2_hat_a);
            std::printf("m_hat_p %.10g  v2_hat_p %.10g\n", agg.m_hat_p, agg.v2_hat_p);
            for (int z = 1; z <= sc.z_max; ++z)
                std::printf("E[AoI_a^%d] %.10g  E[AoI_p^%d] %.10g\n", z,
                            agg.aoi_moments_a[static_cast<std::size_t>(z - 1)], z,
                            agg.aoi_moments_p[static_cast<std::size_t>(z - 1)]);
            std::printf("f_hat %.10g\n", agg.f_hat);
            if (sim_per_run)
                for (std::size_t i = 0; i < result.per_run.size(); ++i)
                    std::printf("run %zu: m_hat_a %.10g m_hat_p %.10g f_hat %.10g\n", i,
                                result.per_run[i].m_hat_a, result.per_run[i].m_hat_p,
                                result.per_run[i].f_hat);
            return 0;
        }

        if (*sweep) {
            const auto config = merge_config(sw_flags, "sweep");
            const Objective obj{config.w_list.front(), config.z_list.front()};
            const int threads =
                config.threads > 0 ? config.threads : aoi::default_thread_count();
            if (*sw_aloha) {
                const auto best = aoi::sim::sweep_optimal_aloha(
                    config.shape, obj, config.slots, config.runs, config.seed, config.p_step,
                    threads);
                std::printf("p_star %.10g\nf_hat %.10g\n", best.p_star, best.f_hat);
            } else {
                const auto best = aoi::sim::sweep_wag_empirical(
                    config.shape, obj, config.sweep_slots, config.sweep_runs, config.seed,
                    config.r_step, config.h_max, threads);
                std::printf("r_star %.10g\nH_star %d\nf_hat %.10g\nlow_confidence %d\n",
                            best.params.r, best.params.h, best.f_hat,
                            best.low_confidence ? 1 : 0);
            }
            return 0;
        }

        if (*validate_cmd) {
            const auto config = merge_config(va_flags, "validate");
            aoi::validation::Options opt;
            opt.threads = config.threads;
            opt.k_trunc = config.k_trunc;
            opt.quick = va_quick;
            opt.out_dir = config.out_dir;
            opt.format = config.format;
            if (*va_mismatch) {
                std::vector<aoi::validation::Outcome> outcomes;
                if (va_model == "two-state")
                    outcomes.push_back(aoi::validation::check_mismatch_two_state(opt));
                else
                    outcomes.push_back(aoi::validation::check_mismatch_wag(opt));
                return print_outcomes(outcomes);
            }
            if (*va_optimality)
                return print_outcomes({aoi::validation::check_optimality(opt)});
            if (*va_lemmas) {
                auto lemma_config = config;
                const auto lemmas = aoi::experiments::run_lemma_checks(lemma_config);
                std::vector<aoi::validation::Outcome> outcomes = {
                    aoi::validation::check_cubic_root_bounds(opt)};
                outcomes.push_back(aoi::validation::Outcome{
                    "lemma grid checks", lemmas.report.all_passed(),
                    "theta>0 margin " + std::to_string(lemmas.report.worst_positive_theta_margin) +
                        ", lambda margin " +
                        std::to_string(lemmas.report.worst_lambda_monotonicity_margin)});
                if (!lemma_config.out_dir.empty())
                    aoi::experiments::emit_lemmas(lemma_config, lemmas);
                return print_outcomes(outcomes);
            }
            if (*va_oracle)
                return print_outcomes({aoi::validation::check_two_state_oracle(opt),
                                       aoi::validation::check_wag_oracle(opt),
                                       aoi::validation::check_phi_identity(opt),
                                       aoi::validation::check_h0_reduction(opt),
                                       aoi::validation::check_exact_approx_error(opt)});
            const auto outcomes = aoi::validation::run_all(opt, true);
            for (const auto& o : outcomes)
                if (!o.passed) return 1;
            return 0;
        }

        if (*compare_cmd) {
            auto config = merge_config(cmp_flags, "compare");
            if (cmp_flags.w_list.empty()) {
                const double n = config.shape.users_per_cluster;
                config.w_list = {n / (n + 1.0), 0.5};
            }
            const auto result = aoi::experiments::run_compare(config);
            for (const auto& f : aoi::experiments::emit_compare(config, result))
                std::printf("wrote %s\n", f.c_str());
            std::printf("wag_beats_baselines %d\nworst_wag_vs_optimal %.10g\n",
                        result.wag_beats_baselines ? 1 : 0, result.worst_wag_vs_optimal);
            return 0;
        }

        if (*efficiency_cmd) {
            const auto config = merge_config(eff_flags, "efficiency");
            const auto result = aoi::experiments::run_efficiency(config);
            for (const auto& f : aoi::experiments::emit_efficiency(config, result))
                std::printf("wrote %s\n", f.c_str());
            return 0;
        }

        if (*report_cmd) {
            for (const auto& f : aoi::experiments::render_csv(rep_in, rep_out))
                std::printf("wrote %s\n", f.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
