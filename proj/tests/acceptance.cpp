// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kcov/cli.hpp"
#include "kcov/simulator.hpp"

using namespace kcov;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 20;
constexpr int kHorizon = 1500;
constexpr int kExtra = 200;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<Point> random_points(std::mt19937_64& rng, int n, const ConvexPolygon& S) {
    const auto b = S.bounds();
    std::vector<Point> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Point q{uniform(rng, b.min_x, b.max_x), uniform(rng, b.min_y, b.max_y)};
        if (S.contains(q)) pts.push_back(q);
    }
    return pts;
}

Point in_disc(std::mt19937_64& rng, Point c, double r) {
    const double a = uniform(rng, 0, 2 * M_PI);
    const double s = r * std::sqrt(uniform(rng, 0, 1));
    return {c.x + s * std::cos(a), c.y + s * std::sin(a)};
}

SimConfig default_config(Mode mode, double epsilon, std::uint64_t seed) {
    SimConfig c;
    c.mode = mode;
    c.epsilon = epsilon;
    c.seed = seed;
    c.steps = kHorizon;
    c.assert_invariants = true;
    return c;
}

struct RunRecord {
    double final_H = 0.0;  // at kHorizon
    long messages = 0;     // at kHorizon
    bool monotone = true;
    double worst_gap_after = 0.0;  // max over steps kHorizon..kHorizon+kExtra
    std::size_t violations = 0;
    double seconds = 0.0;
};

RunRecord simulate(const SimConfig& config, int steps) {
    const auto t0 = std::chrono::steady_clock::now();
    Simulator sim(config);
    sim.run_steps(steps);
    RunRecord r;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& log = sim.log();
    double prev = log.initial_H;
    for (const auto& m : log.steps) {
        if (m.H > prev + 1e-6 * log.initial_H) r.monotone = false;
        prev = m.H;
        if (m.step >= kHorizon) r.worst_gap_after = std::max(r.worst_gap_after, m.centroid_gap);
        if (m.step == kHorizon) {
            r.final_H = m.H;
            r.messages = m.messages_cum;
        }
    }
    r.violations = log.violations.size();
    return r;
}

double dominant_centroid_distance(AgentId i, const std::vector<Point>& pts, int k, const ConvexPolygon& S,
                                  const DensityField& phi, Point other) {
    const auto w = dominant_cell(i, pts, k, S);
    return distance(moments(std::span<const ConvexPolygon>(w.polygons), phi).centroid(), other);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const DensityField uniform_phi = DensityField::uniform();
    const ConvexPolygon square = ConvexPolygon::rectangle(0, 0, 50, 50);

    // Criteria 1 and 2 (and the benchmark / eps 2.5 columns of criterion 3).
    std::map<Mode, std::vector<RunRecord>> by_mode;
    for (Mode mode : {Mode::benchmark, Mode::event_triggered, Mode::self_triggered})
        for (int s = 0; s < kSeeds; ++s)
            by_mode[mode].push_back(simulate(default_config(mode, 2.5, static_cast<std::uint64_t>(s)), kHorizon + kExtra));
    {
        int bad = 0;
        std::size_t violations = 0;
        double slowest = 0.0;
        for (const auto& [mode, runs] : by_mode)
            for (const auto& r : runs) {
                bad += r.monotone ? 0 : 1;
                violations += r.violations;
                slowest = std::max(slowest, r.seconds);
            }
        report(1, bad == 0 && violations == 0, "objective non-increasing, 20 seeds x 3 modes, eps 2.5",
               std::to_string(bad) + " non-monotone runs, " + std::to_string(violations) +
                   " invariant violations, slowest run " + fmt("%.1f", slowest) + " s");
    }
    {
        double worst = 0.0;
        for (const auto& [mode, runs] : by_mode)
            for (const auto& r : runs) worst = std::max(worst, r.worst_gap_after);
        report(2, worst < 1.5 * 2.5, "centroid gap below 1.5 eps from step 1500 through 1700",
               "worst gap " + fmt("%.3f", worst) + " m, limit 3.75 m");
    }

    // Criterion 3: self-triggered sweep; eps 0 is the benchmark.
    {
        const std::vector<double> eps{0.0, 0.5, 1.0, 2.5, 5.0};
        std::vector<double> mean_msgs, mean_H;
        for (double e : eps) {
            std::vector<RunRecord> runs;
            if (e == 0.0) runs = by_mode[Mode::benchmark];
            else if (e == 2.5) runs = by_mode[Mode::self_triggered];
            else
                for (int s = 0; s < kSeeds; ++s)
                    runs.push_back(simulate(default_config(Mode::self_triggered, e, static_cast<std::uint64_t>(s)), kHorizon));
            double m = 0, h = 0;
            for (const auto& r : runs) {
                m += static_cast<double>(r.messages);
                h += r.final_H;
            }
            mean_msgs.push_back(m / runs.size());
            mean_H.push_back(h / runs.size());
        }
        bool non_increasing = true;
        int ties = 0;
        for (std::size_t i = 1; i < eps.size(); ++i) {
            if (mean_msgs[i] > mean_msgs[i - 1]) non_increasing = false;
            if (mean_msgs[i] == mean_msgs[i - 1]) ++ties;
        }
        const double reduction = 100.0 * (1.0 - mean_msgs.back() / mean_msgs.front());
        double worst_degradation = 0.0;
        for (std::size_t i = 1; i < eps.size(); ++i)
            worst_degradation = std::max(worst_degradation, 100.0 * (mean_H[i] / mean_H[0] - 1.0));
        std::string detail = "mean messages";
        for (std::size_t i = 0; i < eps.size(); ++i)
            detail += (i ? ", " : " ") + fmt("%g", eps[i]) + ":" + fmt("%.0f", mean_msgs[i]);
        detail += "; non-increasing with " + std::to_string(ties) + " tie(s)";
        report(3, non_increasing, "(a) messages decrease with eps", detail);
        report(3, reduction >= 60.0, "(b) message reduction at eps 5 >= 60%",
               fmt("%.1f", reduction) + "%, target 80% " + (reduction >= 80.0 ? "met" : "missed"));
        std::string hd = "worst " + fmt("%.2f", worst_degradation) + "%; per eps";
        for (std::size_t i = 1; i < eps.size(); ++i)
            hd += " " + fmt("%g", eps[i]) + ":" + fmt("%.2f", 100.0 * (mean_H[i] / mean_H[0] - 1.0)) + "%";
        hd += std::string("; target 1% ") + (worst_degradation <= 1.0 ? "met" : "missed");
        report(3, worst_degradation <= 5.0, "(c) final objective degradation <= 5%", hd);
    }

    // Criterion 4: diagram polygons vs brute-force k-nearest classification.
    {
        std::mt19937_64 rng(404);
        long disagree = 0, tested = 0, skipped = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (int cfg = 0; cfg < 50; ++cfg) {
            const int n = 3 + cfg % 6;
            const int k = 1 + (cfg / 6) % 3;
            const auto pts = random_points(rng, n, square);
            const auto diagram = korder_diagram(pts, k, square);
            for (int s = 0; s < 10000; ++s) {
                const Point q{uniform(rng, 0, 50), uniform(rng, 0, 50)};
                std::vector<double> d;
                for (Point p : pts) d.push_back(distance(q, p));
                std::sort(d.begin(), d.end());
                if (k < n && d[k] - d[k - 1] < 1e-9) {
                    ++skipped;
                    continue;
                }
                const CellIndex want = brute_force_classify(q, pts, k);
                const CellIndex* best = nullptr;
                double best_margin = -INFINITY;
                for (const auto& [idx, poly] : diagram.cells) {
                    if (poly.empty()) continue;
                    const double m = poly.inside_margin(q);
                    if (m > best_margin) {
                        best_margin = m;
                        best = &idx;
                    }
                }
                ++tested;
                if (!best || *best != want) ++disagree;
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(4, disagree == 0 && secs < 30.0, "k-order cells agree with brute force on 50 configs x 10^4 points",
               std::to_string(disagree) + " disagreements in " + std::to_string(tested) + " points, " +
                   std::to_string(skipped) + " ties skipped, " + fmt("%.1f", secs) + " s");
    }

    // Criterion 5: sandwich of guaranteed, exact and dual-guaranteed masks.
    {
        std::mt19937_64 rng(505);
        const auto frame = make_grid_frame(square, uniform_phi, 256);
        long violations = 0, checks = 0;
        for (int cfg = 0; cfg < 50; ++cfg) {
            const int n = 4 + cfg % 4;
            const int k = 1 + cfg % 3;
            const auto centers = random_points(rng, n, square);
            std::vector<double> radii(n);
            for (auto& r : radii) r = uniform(rng, 0, 4);
            std::vector<Point> truth;
            for (int j = 0; j < n; ++j) truth.push_back(in_disc(rng, centers[j], radii[j]));
            for (AgentId i = 0; i < n; ++i) {
                // Agent i knows itself exactly.
                std::vector<UncertainSite> sites;
                for (int j = 0; j < n; ++j) sites.push_back({j == i ? truth[j] : centers[j], j == i ? 0.0 : radii[j]});
                const auto cells = uncertain_cells(i, sites, k, frame);
                const auto w = rasterize_dominant_cell(i, truth, k, frame);
                for (std::size_t c = 0; c < frame.cells(); ++c) {
                    if (cells.guaranteed.mask[c] && !w.mask[c]) ++violations;
                    if (w.mask[c] && !cells.dual.mask[c]) ++violations;
                }
                ++checks;
            }
        }
        report(5, violations == 0, "guaranteed within exact within dual-guaranteed, 50 uncertain configs",
               std::to_string(violations) + " violating cells over " + std::to_string(checks) + " agent masks");
    }

    // Criterion 6: objective vs its polar-moment decomposition.
    {
        std::mt19937_64 rng(606);
        double worst = 0.0;
        for (int cfg = 0; cfg < 20; ++cfg) {
            const int n = 3 + cfg % 5;
            const int k = 1 + cfg % 3;
            const auto pts = random_points(rng, n, square);
            const DensityField phi = cfg % 2 ? uniform_phi
                                             : DensityField::gaussian_mixture({{{uniform(rng, 0, 50), uniform(rng, 0, 50)}, 8, 1}});
            const double direct = objective_eval(pts, k, square, phi);
            double decomposed = 0.0;
            for (const auto& [idx, cell] : korder_diagram(pts, k, square).cells) {
                if (cell.empty()) continue;
                const Moments m = moments(cell, phi);
                if (!(m.mass > 0.0)) continue;
                const Point c = m.centroid();
                double spread = 0.0;
                for (AgentId a : idx.ids()) spread += squared_distance(pts[a], c);
                decomposed += polar_moment(cell, c, phi) + m.mass * spread / k;
            }
            worst = std::max(worst, std::abs(direct - decomposed) / direct);
        }
        report(6, worst <= 1e-6, "objective equals polar-moment decomposition on 20 configs",
               "worst relative difference " + fmt("%.2e", worst));
    }

    // Criterion 7: bnd sanity.
    {
        std::mt19937_64 rng(707);
        const auto frame = make_grid_frame(square, uniform_phi, 256);
        int failures_bound = 0, instances = 0;
        double worst_ratio = 0.0;
        while (instances < 200) {
            const int n = 5, k = 2;
            const auto centers = random_points(rng, n, square);
            std::vector<double> radii(n, 0.0);
            for (int j = 1; j < n; ++j) radii[j] = uniform(rng, 0, 3);
            std::vector<Point> truth{centers[0]};
            for (int j = 1; j < n; ++j) truth.push_back(in_disc(rng, centers[j], radii[j]));
            std::vector<UncertainSite> sites;
            for (int j = 0; j < n; ++j) sites.push_back({centers[j], radii[j]});
            const auto cells = uncertain_cells(0, sites, k, frame);
            if (!(cells.guaranteed_moments.mass > 0.0)) continue;
            ++instances;
            const double b = bnd(cells);
            const double gap = dominant_centroid_distance(0, truth, k, square, uniform_phi,
                                                          cells.guaranteed_moments.centroid());
            if (gap > b) ++failures_bound;
            if (b > 0) worst_ratio = std::max(worst_ratio, gap / b);
        }
        const double rate = static_cast<double>(failures_bound) / instances;

        // Zero radii: bnd is pure discretization slack, bounded by the boundary layer.
        int slack_bad = 0;
        double max_zero = 0.0;
        for (int cfg = 0; cfg < 20; ++cfg) {
            const auto pts = random_points(rng, 5, square);
            for (AgentId i = 0; i < 5; ++i) {
                std::vector<UncertainSite> sites;
                sites.push_back({pts[i], 0.0});
                for (int j = 0; j < 5; ++j)
                    if (j != i) sites.push_back({pts[j], 0.0});
                const auto cells = uncertain_cells(0, sites, 2, frame);
                double perim = 0.0;
                for (const auto& poly : dominant_cell(i, pts, 2, square).polygons) perim += poly.perimeter();
                const double layer_bound = 4.0 * frame.cell_size * perim;
                const double b = bnd(cells);
                max_zero = std::max(max_zero, b);
                if (b > 2.0 * cells.dual_circumradius * layer_bound / cells.dual_moments.mass + 1e-12) ++slack_bad;
            }
        }
        report(7, rate <= 0.01 && slack_bad == 0, "bnd bounds the true centroid offset on 200 uncertain instances",
               std::to_string(failures_bound) + " failures (" + fmt("%.1f", 100 * rate) +
                   "%), worst offset/bnd " + fmt("%.3f", worst_ratio) + "; zero-radius bnd up to " +
                   fmt("%.3f", max_zero) + " m, " + std::to_string(slack_bad) + " above the boundary-layer bound");
    }

    // Criterion 8: sleep length equals the first trigger of one-step checking.
    {
        std::mt19937_64 rng(808);
        const AgentParams params = make_agent_params(square, uniform_phi, 256, 2, 1.0, 0.1, 2.5, 2.0);
        int mismatches = 0, nonzero = 0;
        for (int state = 0; state < 100; ++state) {
            const auto pts = random_points(rng, 5, square);
            const AgentId owner = static_cast<AgentId>(state % 5);
            AgentStore store = AgentStore::uninformed(owner, pts[owner], 5, params.diam);
            std::vector<Response> all;
            for (AgentId j = 0; j < 5; ++j) all.push_back({j, pts[j]});
            store_update(store, all);
            store_tick(store, uniform(rng, 0, 0.5), params.diam);

            const int planned = multi_step_sleep(store, params).t_sleep;
            int stepped = 0;
            AgentStore walk = store;
            while (!one_step_update_check(walk, params)) {
                motion_step(walk, params);
                ++stepped;
            }
            if (planned != stepped) ++mismatches;
            if (stepped > 0) ++nonzero;
        }
        report(8, mismatches == 0, "multi-step sleep equals iterated one-step check on 100 frozen states",
               std::to_string(mismatches) + " mismatches, " + std::to_string(nonzero) + " states with nonzero sleep");
    }

    // Criterion 9: byte-identical CSVs across repeats and job counts.
    {
        const SimConfig c = default_config(Mode::self_triggered, 2.5, 11);
        const bool repeat = format_csv(run(c)) == format_csv(run(c));
        const fs::path base = fs::temp_directory_path() / "kcov_acceptance";
        fs::remove_all(base);
        auto opts = parse_config({"--sweep-eps", "0,2.5,5", "--seeds", "3", "--steps", "300"});
        opts.out_dir = base / "jobs1";
        opts.jobs = 1;
        const auto a = run_sweep(opts);
        opts.out_dir = base / "jobs8";
        opts.jobs = 8;
        const auto b = run_sweep(opts);
        int differing = 0, files = 0;
        for (const auto& entry : fs::directory_iterator(base / "jobs1")) {
            ++files;
            if (slurp(entry.path()) != slurp(base / "jobs8" / entry.path().filename())) ++differing;
        }
        report(9, repeat && differing == 0 && a.ok() && b.ok() && files == 10,
               "identical CSV bytes across repeats and --jobs 1 vs 8",
               std::string("repeat ") + (repeat ? "identical" : "different") + ", " + std::to_string(differing) +
                   " of " + std::to_string(files) + " sweep files differ");
    }

    // Criterion 10: k = 1 benchmark is classical centroidal descent.
    {
        // Same per-step tolerance as criterion 1; the largest relative rise is printed.
        int non_monotone = 0;
        double worst_gap = 0.0, worst_rise = 0.0;
        for (int s = 0; s < 10; ++s) {
            SimConfig c = default_config(Mode::benchmark, 2.5, static_cast<std::uint64_t>(s));
            c.k = 1;
            const auto log = run(c);
            double prev = log.initial_H;
            bool ok = true;
            for (const auto& m : log.steps) {
                worst_rise = std::max(worst_rise, (m.H - prev) / log.initial_H);
                if (m.H > prev + 1e-6 * log.initial_H) ok = false;
                prev = m.H;
            }
            non_monotone += ok ? 0 : 1;
            worst_gap = std::max(worst_gap, log.steps.back().centroid_gap);
        }
        report(10, non_monotone == 0 && worst_gap < 0.05, "k = 1 benchmark descends to a centroidal Voronoi configuration",
               std::to_string(non_monotone) + " non-monotone runs, largest relative rise " + fmt("%.1e", worst_rise) +
                   ", worst final gap " + fmt("%.2e", worst_gap) + " m");
    }

    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance: %d failing line(s), %.0f s\n", failures, total);
    return failures == 0 ? 0 : 1;
}
