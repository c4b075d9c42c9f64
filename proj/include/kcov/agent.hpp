#pragma once

#include <memory>
#include <span>
#include <vector>

#include "kcov/geometry.hpp"
#include "kcov/grid.hpp"
#include "kcov/partition.hpp"

namespace kcov {

struct StoreEntry {
    Point p;
    double r = 0.0;
};

/// One agent's memory of every agent: last-known position and how far that
/// agent may have moved since. The owner's own entry always has radius 0.
/// `tracked` is the subset of other agents that enters partition
/// computations, i.e. the neighbor set found at the last update.
struct AgentStore {
    AgentId owner = 0;
    std::vector<StoreEntry> entries;
    std::vector<AgentId> tracked;

    /// Knows only its own position: every other agent is tracked with the
    /// maximal radius, so the first trigger check always requests an update.
    static AgentStore uninformed(AgentId owner, Point own_position, int n, double max_radius);

    Point own_position() const { return entries[static_cast<std::size_t>(owner)].p; }
    std::size_t size() const { return entries.size(); }
};

struct Response {
    AgentId id = 0;
    Point position;
};

/// Grows every non-owner radius by d, clamped at max_radius (diam of the domain).
void store_tick(AgentStore& store, double d, double max_radius);
/// Resets each responding agent's entry to its reported position with radius 0.
void store_update(AgentStore& store, std::span<const Response> responses);
/// Records of the requested ids, in the order given. Throws std::out_of_range for unknown ids.
std::vector<UncertainSite> extract(const AgentStore& store, std::span<const AgentId> subset);
/// Positions only.
std::vector<Point> loc(const AgentStore& store, std::span<const AgentId> subset);

struct NeighborSet {
    std::vector<AgentId> ids;
    double rho = 0.0;
};

struct AgentParams {
    ConvexPolygon domain;
    DensityField phi;
    std::shared_ptr<const GridFrame> grid;
    int k = 2;
    double v_max = 1.0;
    double dt = 0.1;
    double epsilon = 2.5;
    double gamma = 2.0;
    int circle_samples = 128;
    KernelIsa isa = preferred_isa();
    double diam = 0.0;

    double step_length() const { return v_max * dt; }
};

/// Builds parameters and the shared grid for a domain; diam is taken from the domain.
AgentParams make_agent_params(const ConvexPolygon& domain, const DensityField& phi, int grid_res, int k,
                              double v_max, double dt, double epsilon, double gamma);

/// What the owner can conclude from its store: goal = centroid of the
/// guaranteed cell, bound = bnd of guaranteed vs dual-guaranteed cells.
struct Assessment {
    bool exhausted = false;  // guaranteed cell empty or massless
    Point goal;
    double bound = 0.0;
};

/// Sites passed to the partition layer: the owner first, then tracked agents.
std::vector<UncertainSite> partition_sites(const AgentStore& store);
Assessment assess(const AgentStore& store, const AgentParams& params);

struct MotionOutcome {
    Point new_position;
    double moved_distance = 0.0;
    Point goal;
    double bound = 0.0;
};

/// One application of the motion law: move toward the guaranteed-cell
/// centroid while staying outside the bnd ball around it, then age the store.
/// Throws GeometryError("uncertainty exhausted") when the guaranteed cell is empty.
MotionOutcome motion_step(AgentStore& store, const AgentParams& params);
MotionOutcome motion_step(AgentStore& store, const AgentParams& params, const Assessment& assessment);

/// Update rule: bound >= max(|goal - p|, epsilon), or an exhausted guaranteed cell.
bool update_required(const Assessment& assessment, Point position, double epsilon);
bool one_step_update_check(const AgentStore& store, const AgentParams& params);

struct SleepPlan {
    int t_sleep = 0;
    /// Positions for the t_sleep steps the agent proceeds without checking.
    std::vector<Point> positions;
    /// The assessment that fired the update rule; it is exactly what the
    /// agent computes when it wakes, since its store evolves deterministically.
    Assessment wake;
};

/// Simulates the agent's own motion and uncertainty growth until the update
/// rule fires; t_sleep is the number of motion steps taken before that.
SleepPlan multi_step_sleep(const AgentStore& store, const AgentParams& params);

/// Grows a communication radius in steps of gamma until every sampled point
/// of the circle of radius rho/2 (inside the domain) has at least k discovered
/// agents strictly closer than the owner. Returns all agents if rho passes
/// 2 * diam first.
NeighborSet neighbor_discovery(AgentId agent, std::span<const Point> true_positions, int k,
                               const AgentParams& params);

}  // namespace kcov
