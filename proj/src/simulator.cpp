#include "kcov/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kcov {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::benchmark:
            return "benchmark";
        case Mode::event_triggered:
            return "event";
        case Mode::self_triggered:
            return "self";
    }
    return "?";
}

void SimConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (n < 2) fail("agents: need at least 2 agents");
    if (k < 1) fail("k: must be >= 1");
    if (k >= n) fail("k must be < n");
    if (domain.empty()) fail("domain: must be a non-empty convex polygon");
    if (!(dt > 0.0)) fail("dt: must be > 0");
    if (!(v_max > 0.0)) fail("vmax: must be > 0");
    if (!(epsilon >= 0.0)) fail("epsilon: must be >= 0");
    if (!(gamma > 0.0)) fail("gamma: must be > 0");
    if (grid_res < 32) fail("grid-res: must be >= 32");
    if (!(alpha > 0.0)) fail("alpha: must be > 0");
    if (!(beta > 0.0)) fail("beta: must be > 0");
    if (!std::isfinite(p_recv_dbm)) fail("precv-dbm: must be finite");
    if (steps < 0) fail("steps: must be >= 0");
}

double mw_to_dbm(double mw) {
    if (mw <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(mw);
}

double dbm_to_mw(double dbm) {
    if (std::isinf(dbm) && dbm < 0.0) return 0.0;
    return std::pow(10.0, 0.1 * dbm);
}

ObjectiveSnapshot evaluate_configuration(std::span<const Point> positions, int k, const ConvexPolygon& domain,
                                         const DensityField& phi) {
    const auto diagram = korder_diagram(positions, k, domain);
    const std::size_t n = positions.size();
    std::vector<Moments> dominant(n);
    ObjectiveSnapshot snap;
    double h = 0.0;
    for (const auto& [index, cell] : diagram.cells) {
        if (cell.empty()) continue;
        const Moments m = moments(cell, phi);
        for (AgentId a : index.ids()) {
            h += polar_moment(cell, positions[static_cast<std::size_t>(a)], phi);
            dominant[static_cast<std::size_t>(a)] += m;
        }
    }
    snap.H = h / k;
    snap.dominant_centroids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(dominant[i].mass > 0.0)) {
            snap.dominant_centroids[i] = positions[i];
            continue;
        }
        snap.dominant_centroids[i] = dominant[i].centroid();
        snap.centroid_gap = std::max(snap.centroid_gap, distance(positions[i], snap.dominant_centroids[i]));
    }
    return snap;
}

double objective_eval(std::span<const Point> positions, int k, const ConvexPolygon& domain, const DensityField& phi) {
    return evaluate_configuration(positions, k, domain, phi).H;
}

ServiceResult service_requests(const WorldState& world, AgentId requester, std::span<const AgentId> targets) {
    ServiceResult out;
    for (AgentId j : targets) {
        if (j == requester) throw std::invalid_argument("service_requests: requester cannot target itself");
        if (j < 0 || static_cast<std::size_t>(j) >= world.positions.size())
            throw std::out_of_range("service_requests: unknown target");
        out.responses.push_back({j, world.positions[static_cast<std::size_t>(j)]});
    }
    out.messages = 2 * static_cast<long>(targets.size());
    return out;
}

std::optional<double> power_step(std::span<const Point> positions, AgentId requester,
                                 std::span<const AgentId> targets, const PowerModel& model) {
    if (targets.empty()) return std::nullopt;
    const Point own = positions[static_cast<std::size_t>(requester)];
    double sum = 0.0;
    for (AgentId j : targets) {
        const double d = distance(own, positions[static_cast<std::size_t>(j)]);
        sum += model.beta * std::pow(10.0, 0.1 * model.p_recv_dbm + model.alpha * d);
    }
    return 10.0 * std::log10(sum);
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<Point> initial_positions(const SimConfig& config) {
    std::mt19937_64 rng(config.seed);
    const auto box = config.domain.bounds();
    std::vector<Point> pts;
    while (static_cast<int>(pts.size()) < config.n) {
        const Point p{box.min_x + unit_uniform(rng) * (box.max_x - box.min_x),
                      box.min_y + unit_uniform(rng) * (box.max_y - box.min_y)};
        if (config.domain.contains(p)) pts.push_back(p);
    }
    return pts;
}

Simulator::Simulator(SimConfig config) : config_(std::move(config)) {
    config_.validate();
    params_ = make_agent_params(config_.domain, config_.phi, config_.grid_res, config_.k, config_.v_max, config_.dt,
                                config_.epsilon, config_.gamma);
    power_ = {config_.alpha, config_.beta, config_.p_recv_dbm};

    world_.positions = initial_positions(config_);
    for (AgentId i = 0; i < config_.n; ++i)
        world_.stores.push_back(
            AgentStore::uninformed(i, world_.positions[static_cast<std::size_t>(i)], config_.n, params_.diam));
    world_.sleep_counters.assign(static_cast<std::size_t>(config_.n), 0);
    world_.plans.assign(static_cast<std::size_t>(config_.n), {});
    world_.wake_assessments.assign(static_cast<std::size_t>(config_.n), std::nullopt);

    const auto snap = evaluate_configuration(world_.positions, config_.k, config_.domain, config_.phi);
    log_.initial_positions = world_.positions;
    log_.initial_H = snap.H;
    log_.initial_centroid_gap = snap.centroid_gap;
    last_H_ = snap.H;
}

void Simulator::update_neighbors(AgentId i, StepMetrics& m) {
    auto& store = world_.stores[static_cast<std::size_t>(i)];
    const NeighborSet nbrs = neighbor_discovery(i, world_.positions, config_.k, params_);
    const ServiceResult svc = service_requests(world_, i, nbrs.ids);
    m.messages_step += svc.messages;
    if (auto p = power_step(world_.positions, i, nbrs.ids, power_)) m.power_mw += dbm_to_mw(*p);
    store_update(store, svc.responses);
    store.tracked = nbrs.ids;
    m.triggered.push_back(i);
}

Point Simulator::advance_benchmark(AgentId i, StepMetrics& m) {
    std::vector<AgentId> others;
    for (AgentId j = 0; j < config_.n; ++j)
        if (j != i) others.push_back(j);
    const ServiceResult svc = service_requests(world_, i, others);
    m.messages_step += svc.messages;
    if (auto p = power_step(world_.positions, i, others, power_)) m.power_mw += dbm_to_mw(*p);
    m.triggered.push_back(i);

    const Point own = world_.positions[static_cast<std::size_t>(i)];
    const DominantCell w = dominant_cell(i, world_.positions, config_.k, config_.domain);
    const Moments mom = moments(w.polygons, config_.phi);
    if (!(mom.mass > 0.0)) return own;
    return tbb(own, params_.step_length(), mom.centroid(), 0.0);
}

Point Simulator::advance_triggered(AgentId i, StepMetrics& m) {
    const auto idx = static_cast<std::size_t>(i);
    auto& store = world_.stores[idx];
    const double d = params_.step_length();

    if (config_.mode == Mode::self_triggered && world_.sleep_counters[idx] > 0) {
        auto& plan = world_.plans[idx];
        const Point next = plan.back();
        plan.pop_back();
        --world_.sleep_counters[idx];
        store_tick(store, d, params_.diam);
        store.entries[idx] = {next, 0.0};
        return next;
    }

    auto& cached = world_.wake_assessments[idx];
    Assessment a = cached ? *cached : assess(store, params_);
    cached.reset();
    if (update_required(a, store.own_position(), params_.epsilon)) {
        update_neighbors(i, m);
        a = assess(store, params_);
    }
    Point next = store.own_position();
    if (a.exhausted) {
        store_tick(store, d, params_.diam);
    } else {
        next = motion_step(store, params_, a).new_position;
    }

    if (config_.mode == Mode::self_triggered) {
        SleepPlan plan = multi_step_sleep(store, params_);
        world_.sleep_counters[idx] = plan.t_sleep;
        std::reverse(plan.positions.begin(), plan.positions.end());
        world_.plans[idx] = std::move(plan.positions);
        world_.wake_assessments[idx] = plan.wake;
    }
    return next;
}

void Simulator::check_invariants(const std::vector<Point>& before, const StepMetrics& m) {
    const double d = params_.step_length();
    auto report = [&](const std::string& what) {
        std::ostringstream os;
        os << "step " << m.step << ": " << what;
        log_.violations.push_back(os.str());
    };
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (distance(before[i], m.positions[i]) > d + 1e-12) report("agent " + std::to_string(i + 1) + " exceeded v_max*dt");
        if (!config_.domain.contains(m.positions[i], kVertexMergeTol))
            report("agent " + std::to_string(i + 1) + " left the domain");
    }
    if (m.H > last_H_ + 1e-6 * log_.initial_H) report("objective increased");
}

StepMetrics Simulator::step() {
    const std::vector<Point> before = world_.positions;
    StepMetrics m;
    m.step = world_.step + 1;
    m.time = m.step * config_.dt;

    std::vector<Point> next(before.size());
    for (AgentId i = 0; i < config_.n; ++i)
        next[static_cast<std::size_t>(i)] =
            config_.mode == Mode::benchmark ? advance_benchmark(i, m) : advance_triggered(i, m);

    world_.positions = next;
    world_.step = m.step;

    const auto snap = evaluate_configuration(world_.positions, config_.k, config_.domain, config_.phi);
    m.H = snap.H;
    m.centroid_gap = snap.centroid_gap;
    m.positions = world_.positions;
    messages_cum_ += m.messages_step;
    m.messages_cum = messages_cum_;

    if (config_.assert_invariants) check_invariants(before, m);
    last_H_ = m.H;
    log_.steps.push_back(m);
    return m;
}

void Simulator::run_steps(int count) {
    for (int s = 0; s < count; ++s) step();
}

TrajectoryLog run(const SimConfig& config) {
    Simulator sim(config);
    sim.run_steps(config.steps);
    return sim.log();
}

}  // namespace kcov
