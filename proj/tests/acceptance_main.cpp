// Acceptance suite: runs every gate at the pinned protocol settings and
// prints one PASS/FAIL line per gate. Exit code is nonzero if any gate fails.

#include <cstdio>
#include <cstring>

#include "aoi/validation.hpp"

int main(int argc, char** argv) {
    aoi::validation::Options opt;
    opt.out_dir = "acceptance_out";
    opt.scratch_dir = "acceptance_out/determinism";
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) opt.quick = true;
        if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
            opt.threads = std::atoi(argv[++i]);
    }

    std::printf("acceptance suite (%s protocol)\n", opt.quick ? "quick" : "full");
    const auto outcomes = aoi::validation::run_all(opt, true);

    int failures = 0;
    for (const auto& outcome : outcomes)
        if (!outcome.passed) ++failures;
    std::printf("%zu gates, %d failed\n", outcomes.size(), failures);
    return failures == 0 ? 0 : 1;
}
