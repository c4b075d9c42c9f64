#include "kcov/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kcov {

AgentStore AgentStore::uninformed(AgentId owner, Point own_position, int n, double max_radius) {
    if (owner < 0 || owner >= n) throw std::invalid_argument("store owner out of range");
    AgentStore s;
    s.owner = owner;
    s.entries.assign(static_cast<std::size_t>(n), StoreEntry{own_position, max_radius});
    s.entries[static_cast<std::size_t>(owner)].r = 0.0;
    for (AgentId j = 0; j < n; ++j)
        if (j != owner) s.tracked.push_back(j);
    return s;
}

void store_tick(AgentStore& store, double d, double max_radius) {
    if (d < 0.0) throw std::invalid_argument("store_tick needs d >= 0");
    for (std::size_t j = 0; j < store.entries.size(); ++j) {
        auto& e = store.entries[j];
        e.r = static_cast<AgentId>(j) == store.owner ? 0.0 : std::min(e.r + d, max_radius);
    }
}

void store_update(AgentStore& store, std::span<const Response> responses) {
    for (const auto& resp : responses) {
        if (resp.id < 0 || static_cast<std::size_t>(resp.id) >= store.entries.size())
            throw std::out_of_range("store_update: unknown agent id");
        store.entries[static_cast<std::size_t>(resp.id)] = {resp.position, 0.0};
    }
}

std::vector<UncertainSite> extract(const AgentStore& store, std::span<const AgentId> subset) {
    std::vector<UncertainSite> out;
    out.reserve(subset.size());
    for (AgentId id : subset) {
        if (id < 0 || static_cast<std::size_t>(id) >= store.entries.size())
            throw std::out_of_range("extract: unknown agent id");
        const auto& e = store.entries[static_cast<std::size_t>(id)];
        out.push_back({e.p, e.r});
    }
    return out;
}

std::vector<Point> loc(const AgentStore& store, std::span<const AgentId> subset) {
    std::vector<Point> out;
    for (const auto& s : extract(store, subset)) out.push_back(s.center);
    return out;
}

AgentParams make_agent_params(const ConvexPolygon& domain, const DensityField& phi, int grid_res, int k,
                              double v_max, double dt, double epsilon, double gamma) {
    AgentParams p;
    p.domain = domain;
    p.phi = phi;
    p.grid = std::make_shared<const GridFrame>(make_grid_frame(domain, phi, grid_res));
    p.k = k;
    p.v_max = v_max;
    p.dt = dt;
    p.epsilon = epsilon;
    p.gamma = gamma;
    p.diam = domain.diameter();
    return p;
}

std::vector<UncertainSite> partition_sites(const AgentStore& store) {
    std::vector<AgentId> ids{store.owner};
    for (AgentId j : store.tracked)
        if (j != store.owner) ids.push_back(j);
    return extract(store, ids);
}

Assessment assess(const AgentStore& store, const AgentParams& params) {
    const auto sites = partition_sites(store);
    const UncertainCells cells = uncertain_cells(0, sites, params.k, *params.grid, params.isa);
    Assessment a;
    if (!(cells.guaranteed_moments.mass > 0.0)) {
        a.exhausted = true;
        return a;
    }
    a.goal = cells.guaranteed_moments.centroid();
    a.bound = bnd(cells);
    return a;
}

MotionOutcome motion_step(AgentStore& store, const AgentParams& params) {
    return motion_step(store, params, assess(store, params));
}

MotionOutcome motion_step(AgentStore& store, const AgentParams& params, const Assessment& assessment) {
    if (assessment.exhausted) throw GeometryError("uncertainty exhausted");
    const double d = params.step_length();
    const Point p = store.own_position();
    MotionOutcome out;
    out.goal = assessment.goal;
    out.bound = assessment.bound;
    out.new_position = tbb(p, d, assessment.goal, assessment.bound);
    out.moved_distance = distance(p, out.new_position);
    store_tick(store, d, params.diam);
    store.entries[static_cast<std::size_t>(store.owner)] = {out.new_position, 0.0};
    return out;
}

bool update_required(const Assessment& assessment, Point position, double epsilon) {
    if (assessment.exhausted) return true;
    return assessment.bound >= std::max(distance(assessment.goal, position), epsilon);
}

bool one_step_update_check(const AgentStore& store, const AgentParams& params) {
    return update_required(assess(store, params), store.own_position(), params.epsilon);
}

SleepPlan multi_step_sleep(const AgentStore& store, const AgentParams& params) {
    AgentStore s = store;
    SleepPlan plan;
    // Radii saturate at diam after this many steps, which empties the guaranteed cell.
    const int limit = static_cast<int>(std::ceil(params.diam / params.step_length())) + 3;
    while (true) {
        const Assessment a = assess(s, params);
        if (update_required(a, s.own_position(), params.epsilon)) {
            plan.wake = a;
            return plan;
        }
        if (plan.t_sleep >= limit) throw std::logic_error("multi_step_sleep did not terminate");
        plan.positions.push_back(motion_step(s, params, a).new_position);
        ++plan.t_sleep;
    }
}

NeighborSet neighbor_discovery(AgentId agent, std::span<const Point> true_positions, int k,
                               const AgentParams& params) {
    const int n = static_cast<int>(true_positions.size());
    if (!(params.gamma > 0.0)) throw std::invalid_argument("neighbor_discovery needs gamma > 0");
    if (agent < 0 || agent >= n) throw std::invalid_argument("neighbor_discovery: agent out of range");
    const Point own = true_positions[static_cast<std::size_t>(agent)];
    const double limit = 2.0 * params.diam;

    NeighborSet result;
    for (double rho = params.gamma; rho <= limit; rho += params.gamma) {
        std::vector<AgentId> near;
        for (AgentId j = 0; j < n; ++j)
            if (j != agent && distance(true_positions[static_cast<std::size_t>(j)], own) < rho) near.push_back(j);

        bool covered = true;
        for (int s = 0; s < params.circle_samples && covered; ++s) {
            const double theta = 2.0 * std::numbers::pi * s / params.circle_samples;
            const Point q{own.x + 0.5 * rho * std::cos(theta), own.y + 0.5 * rho * std::sin(theta)};
            if (!params.domain.contains(q)) continue;
            const double d_own = distance(q, own);
            int closer = 0;
            for (AgentId j : near)
                if (distance(true_positions[static_cast<std::size_t>(j)], q) < d_own) ++closer;
            covered = closer >= k;
        }
        if (covered) {
            result.ids = std::move(near);
            result.rho = rho;
            return result;
        }
    }
    for (AgentId j = 0; j < n; ++j)
        if (j != agent) result.ids.push_back(j);
    result.rho = limit;
    return result;
}

}  // namespace kcov
