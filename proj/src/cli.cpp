#include "kcov/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

namespace kcov {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string g9(double v) { return fmt("%.9g", v); }

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError(flag + ": '" + text + "' is not a finite number");
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

Mode parse_mode(const std::string& text) {
    if (text == "benchmark") return Mode::benchmark;
    if (text == "event") return Mode::event_triggered;
    if (text == "self") return Mode::self_triggered;
    throw UsageError("--mode: expected benchmark, event or self, got '" + text + "'");
}

}  // namespace

SimConfig SweepSpec::cell(double epsilon, std::uint64_t seed) const {
    SimConfig c = base;
    c.epsilon = epsilon;
    c.seed = seed;
    if (epsilon == 0.0) c.mode = Mode::benchmark;
    return c;
}

DensityField parse_density(const std::string& text) {
    if (text == "uniform") return DensityField::uniform(1.0);
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "uniform") {
        const double v = parse_number(rest, "--density");
        if (v < 0.0) throw UsageError("--density: uniform value must be >= 0");
        return DensityField::uniform(v);
    }
    if (kind == "gaussian") {
        const auto parts = split(rest, ',');
        if (parts.empty() || parts.size() % 3 != 0)
            throw UsageError("--density: gaussian needs cx,cy,sigma triples");
        DensityField::Mixture mix;
        for (std::size_t i = 0; i < parts.size(); i += 3) {
            GaussianBump b;
            b.mean = {parse_number(parts[i], "--density"), parse_number(parts[i + 1], "--density")};
            b.sigma = parse_number(parts[i + 2], "--density");
            if (!(b.sigma > 0.0)) throw UsageError("--density: sigma must be > 0");
            mix.push_back(b);
        }
        return DensityField::gaussian_mixture(std::move(mix));
    }
    throw UsageError("--density: expected uniform or gaussian:cx,cy,sigma[,...], got '" + text + "'");
}

ConvexPolygon parse_domain(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw UsageError("--domain: expected WxH, got '" + text + "'");
    const double w = parse_number(text.substr(0, x), "--domain");
    const double h = parse_number(text.substr(x + 1), "--domain");
    if (!(w > 0.0) || !(h > 0.0)) throw UsageError("--domain: width and height must be > 0");
    return ConvexPolygon::rectangle(0.0, 0.0, w, h);
}

CliOptions parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Self-triggered k-order coverage control simulator", "kcov"};
    app.set_config("--config", "", "Flat key = value file; keys are flag names");
    app.allow_config_extras(CLI::config_extras_mode::error);

    const SimConfig defaults;
    int agents = defaults.n;
    int k = defaults.k;
    std::string domain = "50x50";
    double epsilon = defaults.epsilon;
    std::vector<double> sweep_eps;
    int seeds = 0;
    std::uint64_t seed = 0;
    double dt = defaults.dt;
    double vmax = defaults.v_max;
    int steps = defaults.steps;
    double gamma = defaults.gamma;
    int grid_res = defaults.grid_res;
    double alpha = defaults.alpha;
    double beta = defaults.beta;
    double precv = defaults.p_recv_dbm;
    std::string density = "uniform";
    std::string mode = "self";
    std::string out = "out";
    bool svg = false;
    int jobs = 1;
    bool assert_invariants = false;

    app.add_option("--agents", agents, "Number of agents n");
    app.add_option("--k", k, "Coverage order k (< n)");
    app.add_option("--domain", domain, "Rectangular domain WxH in meters");
    app.add_option("--epsilon", epsilon, "Trigger clamp epsilon in meters (0 = benchmark)");
    app.add_option("--sweep-eps", sweep_eps, "Comma-separated epsilon values for a sweep")->delimiter(',');
    app.add_option("--seeds", seeds, "Run seeds seed..seed+N-1 per epsilon");
    auto* seed_opt = app.add_option("--seed", seed, "Initial placement seed (fallback: KCOV_SEED)");
    app.add_option("--dt", dt, "Time step in seconds");
    app.add_option("--vmax", vmax, "Maximum speed in m/s");
    app.add_option("--steps", steps, "Number of steps per run");
    app.add_option("--gamma", gamma, "Neighbor discovery radius increment in meters");
    app.add_option("--grid-res", grid_res, "Cells along the longer side of the domain");
    app.add_option("--alpha", alpha, "Path-loss exponent per meter");
    app.add_option("--beta", beta, "Power scale factor");
    app.add_option("--precv-dbm", precv, "Required received power in dBm");
    app.add_option("--density", density, "uniform | uniform:V | gaussian:cx,cy,sigma[,...]");
    app.add_option("--mode", mode, "benchmark | event | self");
    app.add_option("--out", out, "Output directory");
    app.add_flag("--svg", svg, "Also render an SVG per run");
    app.add_option("--jobs", jobs, "Runs executed in parallel");
    app.add_flag("--assert-invariants", assert_invariants, "Check monotonicity, containment and speed every step");

    std::vector<std::string> argv_store{"kcov"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    CliOptions opts;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        opts.help_text = app.help();
        return opts;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (seed_opt->count() == 0) {
        if (const char* env = std::getenv("KCOV_SEED"); env && *env) {
            try {
                std::size_t used = 0;
                seed = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument(env);
            } catch (const std::exception&) {
                throw UsageError(std::string("KCOV_SEED: '") + env + "' is not an unsigned integer");
            }
        }
    }
    if (seeds < 0) throw UsageError("--seeds: must be >= 1");
    if (jobs < 1) throw UsageError("--jobs: must be >= 1");

    SimConfig& base = opts.sweep.base;
    base.n = agents;
    base.k = k;
    base.domain = parse_domain(domain);
    base.phi = parse_density(density);
    base.dt = dt;
    base.v_max = vmax;
    base.epsilon = epsilon;
    base.gamma = gamma;
    base.grid_res = grid_res;
    base.alpha = alpha;
    base.beta = beta;
    base.p_recv_dbm = precv;
    base.steps = steps;
    base.seed = seed;
    base.mode = parse_mode(mode);
    base.assert_invariants = assert_invariants;
    try {
        base.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    opts.sweep.epsilons = sweep_eps.empty() ? std::vector<double>{epsilon} : sweep_eps;
    for (double e : opts.sweep.epsilons)
        if (!(e >= 0.0) || !std::isfinite(e)) throw UsageError("--sweep-eps: values must be finite and >= 0");
    const int count = seeds > 0 ? seeds : 1;
    for (int i = 0; i < count; ++i) opts.sweep.seeds.push_back(seed + static_cast<std::uint64_t>(i));
    opts.is_sweep = !sweep_eps.empty() || seeds > 0;
    opts.out_dir = out;
    opts.svg = svg;
    opts.jobs = jobs;
    return opts;
}

std::string format_csv(const TrajectoryLog& log) {
    if (log.steps.empty()) throw std::invalid_argument("format_csv needs at least one step");
    const std::size_t n = log.initial_positions.size();
    std::string out = "step,time_s,H,messages_step,messages_cum,power_dbm,triggered_ids";
    for (std::size_t i = 1; i <= n; ++i) out += ",p" + std::to_string(i) + "_x,p" + std::to_string(i) + "_y";
    out += '\n';
    for (const auto& m : log.steps) {
        out += std::to_string(m.step);
        out += ',' + g9(m.time);
        out += ',' + g9(m.H);
        out += ',' + std::to_string(m.messages_step);
        out += ',' + std::to_string(m.messages_cum);
        out += ',' + g9(mw_to_dbm(m.power_mw));
        out += ',';
        for (std::size_t t = 0; t < m.triggered.size(); ++t) {
            if (t) out += ';';
            out += std::to_string(m.triggered[t] + 1);
        }
        for (const Point& p : m.positions) out += ',' + g9(p.x) + ',' + g9(p.y);
        out += '\n';
    }
    return out;
}

void write_csv(const TrajectoryLog& log, const std::filesystem::path& path) { write_text(path, format_csv(log)); }

RunSummary read_run_summary(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("step,time_s,H,", 0) != 0)
        throw std::invalid_argument("read_run_summary: missing CSV header");
    RunSummary s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() < 7) throw std::invalid_argument("read_run_summary: short row");
        s.final_H = std::strtod(f[2].c_str(), nullptr);
        s.total_messages = std::stol(f[4]);
        s.total_power_mw += dbm_to_mw(std::strtod(f[5].c_str(), nullptr));
        ++s.steps;
    }
    if (s.steps == 0) throw std::invalid_argument("read_run_summary: no rows");
    return s;
}

std::vector<SummaryRow> summarize_sweep(const std::vector<SweepCellResult>& cells, std::vector<std::string>* warnings) {
    struct Acc {
        double H = 0.0, msgs = 0.0, power = 0.0;
        int count = 0;
    };
    std::map<double, Acc> by_eps;
    for (const auto& c : cells) {
        Acc& a = by_eps[c.epsilon];
        a.H += c.summary.final_H;
        a.msgs += static_cast<double>(c.summary.total_messages);
        a.power += c.summary.total_power_mw;
        ++a.count;
    }
    std::vector<SummaryRow> rows;
    for (const auto& [eps, a] : by_eps) {
        SummaryRow r;
        r.epsilon = eps;
        r.mean_final_H = a.H / a.count;
        r.mean_msgs = a.msgs / a.count;
        r.mean_power_dbm = mw_to_dbm(a.power / a.count);
        rows.push_back(r);
    }
    const auto base = std::find_if(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.epsilon == 0.0; });
    if (base == rows.end()) {
        if (warnings) warnings->push_back("no epsilon = 0 baseline; relative columns left empty");
        return rows;
    }
    const SummaryRow b = *base;
    for (auto& r : rows) {
        if (b.mean_msgs > 0.0) r.msg_reduction_pct = 100.0 * (1.0 - r.mean_msgs / b.mean_msgs);
        if (b.mean_final_H > 0.0) r.H_degradation_pct = 100.0 * (r.mean_final_H - b.mean_final_H) / b.mean_final_H;
    }
    return rows;
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "epsilon,mean_final_H,mean_msgs,mean_power_dbm,msg_reduction_pct,H_degradation_pct\n";
    for (const auto& r : rows) {
        out += g9(r.epsilon) + ',' + g9(r.mean_final_H) + ',' + g9(r.mean_msgs) + ',' + g9(r.mean_power_dbm) + ',';
        if (r.msg_reduction_pct) out += g9(*r.msg_reduction_pct);
        out += ',';
        if (r.H_degradation_pct) out += g9(*r.H_degradation_pct);
        out += '\n';
    }
    return out;
}

std::string format_svg(const TrajectoryLog& log, const SimConfig& config) {
    if (log.steps.empty()) throw std::invalid_argument("format_svg needs at least one step");
    const auto box = config.domain.bounds();
    const double w = box.max_x - box.min_x;
    const double h = box.max_y - box.min_y;
    const double pad = 0.02 * std::max(w, h);
    // SVG y grows downwards; flip so the domain keeps its orientation.
    auto X = [&](double x) { return fmt("%.6g", x - box.min_x + pad); };
    auto Y = [&](double y) { return fmt("%.6g", box.max_y - y + pad); };
    auto pts = [&](const std::vector<Point>& ps) {
        std::string s;
        for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? " " : "") + X(ps[i].x) + ',' + Y(ps[i].y);
        return s;
    };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
    const double marker = 0.012 * std::max(w, h);

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt("%.6g", w + 2 * pad) << ' '
      << fmt("%.6g", h + 2 * pad) << "\" width=\"600\" height=\"" << fmt("%.0f", 600.0 * (h + 2 * pad) / (w + 2 * pad))
      << "\">\n";
    o << "<polygon class=\"domain\" points=\"" << pts(config.domain.vertices())
      << "\" fill=\"#fafafa\" stroke=\"black\" stroke-width=\"" << fmt("%.3g", 0.004 * std::max(w, h)) << "\"/>\n";

    const auto& final_pos = log.steps.back().positions;
    o << "<g class=\"partition\" fill=\"none\" stroke=\"#999\" stroke-width=\"" << fmt("%.3g", 0.002 * std::max(w, h))
      << "\">\n";
    for (const auto& [index, cell] : korder_diagram(final_pos, config.k, config.domain).cells)
        if (!cell.empty()) o << "<polygon points=\"" << pts(cell.vertices()) << "\"/>\n";
    o << "</g>\n";

    const std::size_t n = log.initial_positions.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Point> path{log.initial_positions[i]};
        for (const auto& m : log.steps) path.push_back(m.positions[i]);
        const char* color = palette[i % std::size(palette)];
        o << "<polyline class=\"trajectory\" data-agent=\"" << i + 1 << "\" points=\"" << pts(path)
          << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt("%.3g", 0.003 * std::max(w, h))
          << "\"/>\n";
        o << "<circle class=\"start\" cx=\"" << X(path.front().x) << "\" cy=\"" << Y(path.front().y) << "\" r=\""
          << fmt("%.3g", marker) << "\" fill=\"white\" stroke=\"" << color << "\"/>\n";
        o << "<circle class=\"end\" cx=\"" << X(path.back().x) << "\" cy=\"" << Y(path.back().y) << "\" r=\""
          << fmt("%.3g", marker) << "\" fill=\"" << color << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void render_svg(const TrajectoryLog& log, const SimConfig& config, const std::filesystem::path& path) {
    write_text(path, format_svg(log, config));
}

std::string cell_name(double epsilon, std::uint64_t seed) {
    return "eps_" + fmt("%g", epsilon) + "_seed_" + std::to_string(seed);
}

SweepOutcome run_sweep(const CliOptions& options) {
    const SweepSpec& spec = options.sweep;
    std::filesystem::create_directories(options.out_dir);

    struct Cell {
        double epsilon;
        std::uint64_t seed;
        std::optional<RunSummary> summary;
        std::vector<std::string> failures;
    };
    std::vector<Cell> cells;
    for (double e : spec.epsilons)
        for (std::uint64_t s : spec.seeds) cells.push_back({e, s, std::nullopt, {}});

    auto execute = [&](Cell& cell) {
        const std::string name = cell_name(cell.epsilon, cell.seed);
        try {
            const SimConfig config = spec.cell(cell.epsilon, cell.seed);
            const TrajectoryLog log = run(config);
            const std::string csv = format_csv(log);
            write_text(options.out_dir / (name + ".csv"), csv);
            if (options.svg) render_svg(log, config, options.out_dir / (name + ".svg"));
            cell.summary = read_run_summary(csv);
            for (const auto& v : log.violations) cell.failures.push_back(name + ": " + v);
        } catch (const std::exception& e) {
            cell.failures.push_back(name + ": " + e.what());
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) execute(cells[i]);
    };
    const int threads = std::min<int>(options.jobs, static_cast<int>(cells.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SweepOutcome outcome;
    for (const auto& c : cells) {
        if (c.summary) outcome.cells.push_back({c.epsilon, c.seed, *c.summary});
        outcome.failures.insert(outcome.failures.end(), c.failures.begin(), c.failures.end());
    }
    outcome.summary = summarize_sweep(outcome.cells, &outcome.warnings);
    if (options.is_sweep) write_text(options.out_dir / "summary.csv", format_summary_csv(outcome.summary));
    return outcome;
}

}  // namespace kcov
