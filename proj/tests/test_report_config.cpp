#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoi/config.hpp"
#include "aoi/experiments.hpp"
#include "aoi/report.hpp"
#include "aoi/rng.hpp"

using namespace aoi;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

report::Row sample_row(double r, int z, bool active) {
    report::Row row;
    row.experiment = active ? "mismatch-two-state:active" : "mismatch-two-state:passive";
    row.c = 1;
    row.n = 2;
    row.w = std::numeric_limits<double>::quiet_NaN();
    row.z = z;
    row.policy = "two-state";
    row.param1 = r;
    row.param2 = 1.0;
    row.theoretical = 2.0 + r;
    row.empirical = 2.1 + r;
    row.mismatch = report::mismatch_fraction(row.theoretical, row.empirical);
    row.f_value = std::numeric_limits<double>::quiet_NaN();
    row.seed = 42;
    row.runs = 5;
    row.slots = 100;
    row.rng_id = rng::kAlgorithmId;
    return row;
}

} // namespace

TEST_CASE("mismatch fraction and float formatting") {
    CHECK(report::mismatch_fraction(1.0, 2.0) == doctest::Approx(0.5));
    CHECK(report::mismatch_fraction(2.0, 2.0) == doctest::Approx(0.0));
    CHECK(report::format_double(std::numeric_limits<double>::quiet_NaN()) == "");
    CHECK(report::format_double(0.25) == "0.25");
    CHECK(report::format_double(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("CSV: header-only for empty row sets, notes as comments") {
    const std::string empty = report::to_csv({}, {"grid=none"});
    CHECK(empty ==
          "# grid=none\n"
          "experiment,C,N,w,z,policy,param1,param2,theoretical,empirical,mismatch,"
          "f_value,seed,runs,slots,rng_id\n");
}

TEST_CASE("CSV: deterministic bytes and recomputable mismatch column") {
    std::vector<report::Row> rows{sample_row(0.1, 1, true), sample_row(0.2, 2, false)};
    const std::string a = report::to_csv(rows);
    const std::string b = report::to_csv(rows);
    CHECK(a == b);

    // Every data row's mismatch recomputes from its own columns.
    std::stringstream ss(a);
    std::string line;
    std::getline(ss, line); // header
    while (std::getline(ss, line)) {
        std::vector<std::string> parts;
        std::stringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) parts.push_back(item);
        const double theoretical = std::stod(parts[8]);
        const double empirical = std::stod(parts[9]);
        const double mismatch = std::stod(parts[10]);
        CHECK(mismatch ==
              doctest::Approx(report::mismatch_fraction(theoretical, empirical)).epsilon(1e-9));
    }

    // NaN serializes as an empty cell.
    CHECK(a.find(",,") != std::string::npos);
}

TEST_CASE("SVG writers produce self-contained charts") {
    const auto dir = std::filesystem::temp_directory_path() / "aoi_report_test";
    std::filesystem::create_directories(dir);

    report::Series s1{"z=1", {0.1, 0.2, 0.3}, {0.01, 0.02, 0.015}};
    report::Series s2{"z=2", {0.1, 0.2, 0.3}, {0.05, 0.04, 0.06}};
    report::write_line_chart(dir / "line.svg", "title", "r", "mismatch", {s1, s2});
    const std::string line_svg = slurp(dir / "line.svg");
    CHECK(line_svg.find("<svg") == 0);
    CHECK(line_svg.find("</svg>") != std::string::npos);
    CHECK(line_svg.find("z=2") != std::string::npos);
    CHECK(line_svg.find("http://") == line_svg.find("http://www.w3.org/2000/svg")); // no assets

    report::write_bar_chart(dir / "bar.svg", "bars", {"wag", "aloha"},
                            {{"z=1", {2.0, 3.0}}, {"z=2", {4.0, 5.5}}});
    const std::string bar_svg = slurp(dir / "bar.svg");
    CHECK(bar_svg.find("<rect") != std::string::npos);
    CHECK(bar_svg.find("aloha") != std::string::npos);
}

TEST_CASE("config: parsing, comments, overrides, lists") {
    const auto kv = cfg::KeyValues::parse_text(
        "# comment line\n"
        "experiment = mismatch-two-state\n"
        "C = 2   # trailing comment\n"
        "N = 4\n"
        "w = 0.5, 0.25\n"
        "z = 1..3\n"
        "slots=12345\n");
    auto config = cfg::experiment_config_from(kv);
    CHECK(config.experiment == "mismatch-two-state");
    CHECK(config.shape.clusters == 2);
    CHECK(config.shape.users_per_cluster == 4);
    CHECK(config.w_list == std::vector<double>{0.5, 0.25});
    CHECK(config.z_list == std::vector<int>{1, 2, 3});
    CHECK(config.slots == 12345);
    CHECK(config.seed == cfg::default_seed("mismatch-two-state"));

    auto kv2 = kv;
    kv2.set("seed", "7");
    CHECK(cfg::experiment_config_from(kv2).seed == 7);

    CHECK_THROWS_AS(cfg::KeyValues::parse_text("not a pair\n"), IoError);
    CHECK_THROWS_AS(cfg::KeyValues::parse_text("slots = many\n").get_int("slots", 0), IoError);
}

TEST_CASE("default seeds are stable and experiment-specific") {
    CHECK(cfg::default_seed("compare") == cfg::default_seed("compare"));
    CHECK(cfg::default_seed("compare") != cfg::default_seed("efficiency"));
}

TEST_CASE("render_csv regenerates charts from emitted files") {
    const auto dir = std::filesystem::temp_directory_path() / "aoi_render_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    std::vector<report::Row> rows;
    for (double r : {0.1, 0.2, 0.3})
        for (int z : {1, 2}) {
            rows.push_back(sample_row(r, z, true));
            rows.push_back(sample_row(r, z, false));
        }
    const auto csv = dir / "mismatch.csv";
    report::write_csv(csv, rows, {"note"});
    const auto files = experiments::render_csv(csv.string(), (dir / "charts").string());
    CHECK(!files.empty());
    for (const auto& f : files) {
        CHECK(std::filesystem::exists(f));
        CHECK(f.substr(f.size() - 4) == ".svg");
    }
}

TEST_CASE("lemma experiment emits a CSV with one row per claim") {
    cfg::ExperimentConfig config;
    config.experiment = "lemma-check";
    config.shape = {1, 6};
    config.out_dir =
        (std::filesystem::temp_directory_path() / "aoi_lemma_test").string();
    std::filesystem::remove_all(config.out_dir);
    const auto result = experiments::run_lemma_checks(config);
    CHECK(result.report.all_passed());
    const auto files = experiments::emit_lemmas(config, result);
    REQUIRE(files.size() == 1);
    const std::string text = slurp(files.front());
    CHECK(text.find("alpha-exceeds-1/N") != std::string::npos);
    CHECK(text.find("beta-exceeds-1/N") != std::string::npos);
}
