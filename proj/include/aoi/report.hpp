#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aoi::report {

/**
 * One grid cell of an experiment. Serialized CSV schema (fixed order):
 *   experiment,C,N,w,z,policy,param1,param2,theoretical,empirical,mismatch,
 *   f_value,seed,runs,slots,rng_id
 * NaN fields serialize as empty cells. mismatch is always
 * |theoretical - empirical| / empirical when both sides are present.
 */
struct Row {
    std::string experiment;
    int c = 0;
    int n = 0;
    double w = 0.0;
    int z = 0;
    std::string policy;
    double param1 = 0.0;
    double param2 = 0.0;
    double theoretical = 0.0;
    double empirical = 0.0;
    double mismatch = 0.0;
    double f_value = 0.0;
    std::uint64_t seed = 0;
    long long runs = 0;
    long long slots = 0;
    std::string rng_id;
};

/// |theoretical - empirical| / empirical.
double mismatch_fraction(double theoretical, double empirical);

/// Deterministic shortest-round-trip-ish formatting ("%.10g"); NaN -> "".
std::string format_double(double x);

/// Comment lines ('# ...') carrying grid/provenance notes precede the header.
std::string to_csv(const std::vector<Row>& rows, const std::vector<std::string>& notes = {});

void write_csv(const std::filesystem::path& file, const std::vector<Row>& rows,
               const std::vector<std::string>& notes = {});

// ---------------------------------------------------------------------------
// Minimal self-contained SVG charts (data-first; no external assets).
// ---------------------------------------------------------------------------

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

void write_line_chart(const std::filesystem::path& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

struct BarGroup {
    std::string label;                // one group, e.g. "z=1"
    std::vector<double> values;       // one value per bar label
};

void write_bar_chart(const std::filesystem::path& file, const std::string& title,
                     const std::vector<std::string>& bar_labels,
                     const std::vector<BarGroup>& groups);

} // namespace aoi::report
