#pragma once

#include <map>
#include <string>
#include <vector>

#include "aoi/config.hpp"
#include "aoi/report.hpp"
#include "aoi/two_state.hpp"

namespace aoi::experiments {

// ---------------------------------------------------------------------------
// Approximation-mismatch studies (closed forms vs seeded simulation).
// ---------------------------------------------------------------------------

struct MismatchResult {
    std::vector<report::Row> rows;
    /// Worst mismatch per (z, active?) over the whole grid.
    std::map<std::pair<int, bool>, double> worst;
    std::vector<std::string> notes;

    double worst_of(int z, bool active) const {
        const auto it = worst.find({z, active});
        return it == worst.end() ? 0.0 : it->second;
    }
};

MismatchResult run_mismatch_two_state(const cfg::ExperimentConfig& config);
MismatchResult run_mismatch_wag(const cfg::ExperimentConfig& config);

// ---------------------------------------------------------------------------
// s = 1 optimality validation (full s-grid simulation per r).
// ---------------------------------------------------------------------------

struct OptimalityResult {
    std::vector<report::Row> rows;
    double worst_active_gap = 0.0;     // max over (r, z) of (F̂(s=1) - best)/best
    bool passive_best_always_s1 = true;
    double s1_active_win_fraction = 0.0;
    std::vector<std::string> notes;
};

OptimalityResult run_optimality(const cfg::ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Policy comparison (analytic optima + empirical sweeps + baselines).
// ---------------------------------------------------------------------------

struct CompareResult {
    std::vector<report::Row> rows;
    bool wag_beats_baselines = true;     // vs aloha, optimal aloha, ATA in every cell
    double worst_wag_vs_optimal = 0.0;   // max of F̂(WaG)/F̂(Optimal WaG)
    std::vector<std::string> notes;
};

CompareResult run_compare(const cfg::ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Formula-based WaG vs budget-matched simulation-based WaG_R.
// ---------------------------------------------------------------------------

struct EfficiencyResult {
    std::vector<report::Row> rows;           // deterministic given a pinned budget
    std::vector<std::string> runtime_lines;  // wall-clock diagnostics (not byte-stable)
    long long budget_used = 0;               // WaG_R slots per cell-run
    bool low_confidence = false;
    std::vector<std::string> notes;
};

EfficiencyResult run_efficiency(const cfg::ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Structural lemma checks.
// ---------------------------------------------------------------------------

struct LemmaResult {
    std::vector<report::Row> rows;
    twostate::LemmaReport report;
};

LemmaResult run_lemma_checks(const cfg::ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Deterministic reference checks (closed forms vs the exact-chain module).
// ---------------------------------------------------------------------------

struct OracleChecks {
    bool two_state_ok = true;
    double worst_two_state_mean_err = 0.0;
    double worst_two_state_var_err = 0.0;
    bool wag_ok = true;
    double worst_wag_mean_err = 0.0;
    double worst_wag_var_err = 0.0;
    bool phi_ok = true;
    double worst_phi_err = 0.0;
    bool reduction_ok = true;
    double worst_reduction_err = 0.0;
    std::vector<report::Row> rows;
};

OracleChecks run_oracle_checks(int k_trunc);

/// Second-order approximation error against exact AoI moments (no simulation),
/// at the validated model settings; bounds mirror the mismatch studies.
struct ApproxErrorChecks {
    std::map<std::pair<int, bool>, double> worst_two_state; // (z, active?)
    std::map<std::pair<int, bool>, double> worst_wag_single; // C=1, N=1
    std::map<std::pair<int, bool>, double> worst_wag_multi;  // C=2, N=4
    std::vector<report::Row> rows;
};

ApproxErrorChecks run_exact_approx_error();

// ---------------------------------------------------------------------------
// Output emission.
// ---------------------------------------------------------------------------

/// Write the experiment's CSV (and SVG when requested) under config.out_dir.
/// Returns the list of files written.
std::vector<std::string> emit_mismatch(const cfg::ExperimentConfig& config,
                                       const MismatchResult& result, const std::string& model);
std::vector<std::string> emit_optimality(const cfg::ExperimentConfig& config,
                                         const OptimalityResult& result);
std::vector<std::string> emit_compare(const cfg::ExperimentConfig& config,
                                      const CompareResult& result);
std::vector<std::string> emit_efficiency(const cfg::ExperimentConfig& config,
                                         const EfficiencyResult& result);
std::vector<std::string> emit_lemmas(const cfg::ExperimentConfig& config,
                                     const LemmaResult& result);

/// Regenerate the SVG view(s) for a CSV previously produced by emit_*.
std::vector<std::string> render_csv(const std::string& csv_file, const std::string& out_dir);

} // namespace aoi::experiments
