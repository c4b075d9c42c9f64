#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kcov/agent.hpp"
#include "kcov/geometry.hpp"
#include "kcov/partition.hpp"

namespace kcov {

enum class Mode { benchmark, event_triggered, self_triggered };

const char* mode_name(Mode mode);

struct SimConfig {
    int n = 5;
    int k = 2;
    ConvexPolygon domain = ConvexPolygon::rectangle(0.0, 0.0, 50.0, 50.0);
    DensityField phi = DensityField::uniform(1.0);
    double dt = 0.1;
    double v_max = 1.0;
    double epsilon = 2.5;
    double gamma = 2.0;
    int grid_res = 256;
    double alpha = 0.1;
    double beta = 1.0;
    double p_recv_dbm = 0.0;
    int steps = 1500;
    std::uint64_t seed = 0;
    Mode mode = Mode::self_triggered;
    bool assert_invariants = false;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct WorldState {
    std::vector<Point> positions;
    std::vector<AgentStore> stores;
    std::vector<int> sleep_counters;
    /// Remaining precomputed positions of sleeping agents.
    std::vector<std::vector<Point>> plans;
    /// Assessment each sleeping agent will see on waking, computed when it fell asleep.
    std::vector<std::optional<Assessment>> wake_assessments;
    int step = 0;
};

struct StepMetrics {
    int step = 0;
    double time = 0.0;
    double H = 0.0;
    long messages_step = 0;
    long messages_cum = 0;
    /// Sum of the transmitting agents' output powers in milliwatts.
    double power_mw = 0.0;
    std::vector<Point> positions;
    std::vector<AgentId> triggered;
    /// max_i |p_i - C_{W_i}| with the true positions after the step.
    double centroid_gap = 0.0;
};

struct TrajectoryLog {
    std::vector<Point> initial_positions;
    double initial_H = 0.0;
    double initial_centroid_gap = 0.0;
    std::vector<StepMetrics> steps;
    /// Per-step invariant failures; only collected with assert_invariants.
    std::vector<std::string> violations;
};

double mw_to_dbm(double mw);
double dbm_to_mw(double dbm);

/// (1/k) sum over k-order cells V_I of the integral of sum_{i in I} |q - p_i|^2 phi.
double objective_eval(std::span<const Point> positions, int k, const ConvexPolygon& domain, const DensityField& phi);

/// Objective and the largest agent-to-dominant-centroid distance from one diagram.
struct ObjectiveSnapshot {
    double H = 0.0;
    double centroid_gap = 0.0;
    std::vector<Point> dominant_centroids;
};
ObjectiveSnapshot evaluate_configuration(std::span<const Point> positions, int k, const ConvexPolygon& domain,
                                         const DensityField& phi);

struct ServiceResult {
    std::vector<Response> responses;
    long messages = 0;
};

/// Request-response round with each target: one request plus one response each.
ServiceResult service_requests(const WorldState& world, AgentId requester, std::span<const AgentId> targets);

struct PowerModel {
    double alpha = 0.1;
    double beta = 1.0;
    double p_recv_dbm = 0.0;
};

/// 10 log10( sum_j beta 10^(0.1 P + alpha |p_i - p_j|) ) in dBm; nullopt when nobody is addressed.
std::optional<double> power_step(std::span<const Point> positions, AgentId requester,
                                 std::span<const AgentId> targets, const PowerModel& model);

/// Deterministic engine for one configuration. Each step evaluates triggers
/// against the start-of-step positions, services all requests, then applies
/// every motion at once.
class Simulator {
  public:
    explicit Simulator(SimConfig config);

    const SimConfig& config() const { return config_; }
    const AgentParams& params() const { return params_; }
    const WorldState& world() const { return world_; }
    const TrajectoryLog& log() const { return log_; }

    StepMetrics step();
    void run_steps(int count);

  private:
    Point advance_benchmark(AgentId i, StepMetrics& m);
    Point advance_triggered(AgentId i, StepMetrics& m);
    void update_neighbors(AgentId i, StepMetrics& m);
    void check_invariants(const std::vector<Point>& before, const StepMetrics& m);

    SimConfig config_;
    AgentParams params_;
    PowerModel power_;
    WorldState world_;
    TrajectoryLog log_;
    long messages_cum_ = 0;
    double last_H_ = 0.0;
};

/// Uniform placement in the domain by rejection sampling from its bounding box.
std::vector<Point> initial_positions(const SimConfig& config);

/// Runs config.steps steps from the seeded initial placement.
TrajectoryLog run(const SimConfig& config);

}  // namespace kcov
