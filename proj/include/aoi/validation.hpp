#pragma once

#include <string>
#include <vector>

namespace aoi::validation {

struct Outcome {
    std::string name;
    bool passed;
    std::string detail;
};

struct Options {
    int threads = 0;            // 0 = default_thread_count()
    int k_trunc = 1000;
    std::string scratch_dir;    // for the determinism round trip; empty = temp dir
    std::string out_dir;        // when set, the simulation-backed checks emit reports here
    std::string format = "both";
    double optimality_r_step = 0.04;
    bool quick = false;         // shrink the simulation protocols (smoke use only)
};

// Deterministic closed-form vs exact-chain gates.
Outcome check_two_state_oracle(const Options& opt);  // means 1e-9, variances 1e-8
Outcome check_wag_oracle(const Options& opt);        // means 1e-12, variances 1e-8
Outcome check_phi_identity(const Options& opt);      // closed form vs recursion, 1e-12
Outcome check_h0_reduction(const Options& opt);      // WaG(H=0) vs two-state(s=1), 1e-9

// Simulation-backed reproduction gates.
Outcome check_mismatch_two_state(const Options& opt);
Outcome check_mismatch_wag(const Options& opt);
Outcome check_optimality(const Options& opt);
Outcome check_compare(const Options& opt);

// Structural and exactness gates.
Outcome check_cubic_root_bounds(const Options& opt);
Outcome check_exact_approx_error(const Options& opt);
Outcome check_determinism(const Options& opt);

/// Every acceptance gate, in order; prints one PASS/FAIL line per gate to
/// stdout as it goes when `verbose`.
std::vector<Outcome> run_all(const Options& opt, bool verbose);

} // namespace aoi::validation
