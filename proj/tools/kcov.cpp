// Command-line front end: single runs and epsilon/seed sweeps.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "kcov/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    kcov::CliOptions options;
    try {
        options = kcov::parse_config(args);
    } catch (const kcov::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n(run with --help for the flag list)\n", e.what());
        return 2;
    }
    if (!options.help_text.empty()) {
        std::fputs(options.help_text.c_str(), stdout);
        return 0;
    }

    const auto outcome = kcov::run_sweep(options);
    for (const auto& c : outcome.cells)
        std::printf("%s: final H %.6g, messages %ld\n", kcov::cell_name(c.epsilon, c.seed).c_str(),
                    c.summary.final_H, c.summary.total_messages);
    if (options.is_sweep) {
        std::fputs(kcov::format_summary_csv(outcome.summary).c_str(), stdout);
        for (const auto& w : outcome.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    for (const auto& f : outcome.failures) std::fprintf(stderr, "FAILED %s\n", f.c_str());
    return outcome.ok() ? 0 : 1;
}
