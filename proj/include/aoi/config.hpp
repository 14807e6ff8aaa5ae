#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aoi/types.hpp"

namespace aoi::cfg {

/**
 * Flat key = value configuration ('#' starts a comment, blank lines ignored).
 * Command-line flags override file values; the merged set drives the
 * experiment runners. Keys mirror the CLI flag names (see README).
 */
class KeyValues {
  public:
    static KeyValues parse_file(const std::filesystem::path& file);
    static KeyValues parse_text(const std::string& text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_real(const std::string& key, double fallback) const;
    /// Comma-separated values; integer lists also accept "a..b" ranges.
    std::vector<double> get_real_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    const std::map<std::string, std::string>& raw() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
    std::string experiment;
    NetworkShape shape{1, 1};
    std::vector<double> w_list{0.5};
    std::vector<int> z_list{1, 2, 3};
    std::vector<double> s_list{1.0, 0.8}; // two-state mismatch settings
    std::vector<double> r_list;           // explicit r grid; empty = auto
    std::vector<int> h_list;              // explicit H grid; empty = auto
    long long slots = 10000;
    int runs = 100;
    std::uint64_t seed = 0; // 0 = derive from experiment name
    int k_trunc = 1000;
    double r_step = 0.01;
    double p_step = 0.01;
    int h_max = 15;
    long long sweep_slots = 5000; // per-run slots for empirical parameter sweeps
    int sweep_runs = 4;
    long long budget = 0; // WaG_R slots per cell-run; 0 = derive from measured runtime
    std::string out_dir = "out";
    std::string format = "both"; // csv | svg | both
    std::string seq_file;
    int threads = 0; // 0 = default_thread_count()
};

/// Seed fixed per experiment family: 42 + FNV-1a(experiment), printed in reports.
std::uint64_t default_seed(const std::string& experiment);

ExperimentConfig experiment_config_from(const KeyValues& kv);

} // namespace aoi::cfg
