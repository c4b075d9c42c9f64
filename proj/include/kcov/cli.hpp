#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcov/simulator.hpp"

namespace kcov {

/// Bad or contradictory command-line / config-file input; the message names the flag.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Matrix of runs: every epsilon against every seed. epsilon == 0 runs the benchmark.
struct SweepSpec {
    std::vector<double> epsilons;
    std::vector<std::uint64_t> seeds;
    SimConfig base;

    /// Configuration for one cell of the matrix.
    SimConfig cell(double epsilon, std::uint64_t seed) const;
};

struct CliOptions {
    SweepSpec sweep;
    bool is_sweep = false;  // --sweep-eps or --seeds given
    std::filesystem::path out_dir = "out";
    bool svg = false;
    int jobs = 1;
    /// Non-empty when --help was requested; nothing should run then.
    std::string help_text;
};

/// Parses flags (args exclude the program name). `--config FILE` reads flat
/// `key = value` lines with the flag names as keys; flags override the file.
/// Falls back to the KCOV_SEED environment variable when --seed is absent.
CliOptions parse_config(const std::vector<std::string>& args);

/// `uniform`, `uniform:VALUE` or `gaussian:cx,cy,sigma[,cx,cy,sigma...]` (unit weights).
DensityField parse_density(const std::string& text);
/// `WxH` rectangle anchored at the origin.
ConvexPolygon parse_domain(const std::string& text);

/// Per-step CSV; see write_csv.
std::string format_csv(const TrajectoryLog& log);
/// Header `step,time_s,H,messages_step,messages_cum,power_dbm,triggered_ids,p1_x,p1_y,...`,
/// one row per step, 9 significant digits, 1-based agent ids joined by ';'.
void write_csv(const TrajectoryLog& log, const std::filesystem::path& path);

/// What the sweep summary needs from one run, recovered from its CSV text.
struct RunSummary {
    double final_H = 0.0;
    long total_messages = 0;
    double total_power_mw = 0.0;
    int steps = 0;
};
RunSummary read_run_summary(const std::string& csv);

struct SweepCellResult {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    RunSummary summary;
};

struct SummaryRow {
    double epsilon = 0.0;
    double mean_final_H = 0.0;
    double mean_msgs = 0.0;
    /// Mean of the per-run total power in milliwatts, expressed in dBm.
    double mean_power_dbm = 0.0;
    /// Relative to the epsilon = 0 row; absent without that baseline.
    std::optional<double> msg_reduction_pct;
    std::optional<double> H_degradation_pct;
};

/// One row per distinct epsilon, ascending. `warnings` receives a note when
/// the epsilon = 0 baseline is missing.
std::vector<SummaryRow> summarize_sweep(const std::vector<SweepCellResult>& cells,
                                        std::vector<std::string>* warnings = nullptr);
std::string format_summary_csv(const std::vector<SummaryRow>& rows);

/// Domain outline, final k-order partition edges, trajectories, start and end markers.
std::string format_svg(const TrajectoryLog& log, const SimConfig& config);
void render_svg(const TrajectoryLog& log, const SimConfig& config, const std::filesystem::path& path);

/// File stem used for one sweep cell, e.g. `eps_2.5_seed_7`.
std::string cell_name(double epsilon, std::uint64_t seed);

struct SweepOutcome {
    std::vector<SweepCellResult> cells;  // matrix order: epsilon-major, then seed
    std::vector<SummaryRow> summary;
    std::vector<std::string> warnings;
    /// "cell: message" entries for invariant violations and failed runs.
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Runs every cell on up to `jobs` threads, writes `<cell>.csv` (and `.svg`
/// when requested) into out_dir plus `summary.csv` for sweeps. Results do not
/// depend on `jobs`.
SweepOutcome run_sweep(const CliOptions& options);

}  // namespace kcov
