#include <doctest.h>

#include <random>

#include "kcov/simulator.hpp"
#include "support.hpp"

using namespace kcov;

namespace {

SimConfig quick(Mode mode, int steps = 120, std::uint64_t seed = 3) {
    SimConfig c;
    c.mode = mode;
    c.steps = steps;
    c.seed = seed;
    c.grid_res = 96;
    c.assert_invariants = true;
    return c;
}

bool same_log(const TrajectoryLog& a, const TrajectoryLog& b) {
    if (a.steps.size() != b.steps.size() || a.initial_H != b.initial_H) return false;
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        const auto& x = a.steps[t];
        const auto& y = b.steps[t];
        if (x.H != y.H || x.messages_step != y.messages_step || x.power_mw != y.power_mw ||
            x.positions != y.positions || x.triggered != y.triggered)
            return false;
    }
    return true;
}

// Sum over cells of the polar moment about the cell centroid plus the
// parallel-axis terms for every member.
double polar_decomposition(const std::vector<Point>& pts, int k, const ConvexPolygon& S, const DensityField& phi) {
    double total = 0.0;
    for (const auto& [idx, cell] : korder_diagram(pts, k, S).cells) {
        if (cell.empty() || !(mass(cell, phi) > 0.0)) continue;
        const Point c = centroid(cell, phi);
        const double m = mass(cell, phi);
        double spread = 0.0;
        for (AgentId a : idx.ids()) spread += m * squared_distance(pts[a], c);
        total += polar_moment(cell, c, phi) + spread / k;
    }
    return total;
}

}  // namespace

TEST_CASE("mode names and validation") {
    CHECK(std::string(mode_name(Mode::benchmark)) == "benchmark");
    CHECK(std::string(mode_name(Mode::event_triggered)) == "event");
    CHECK(std::string(mode_name(Mode::self_triggered)) == "self");
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.k = 5;
    CHECK_THROWS_WITH(c.validate(), "k must be < n");
    c = SimConfig{};
    c.dt = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SimConfig{};
    c.grid_res = 16;
    CHECK_THROWS(c.validate());
    c = SimConfig{};
    c.epsilon = -1;
    CHECK_THROWS(c.validate());
}

TEST_CASE("power unit conversions") {
    CHECK(mw_to_dbm(1.0) == 0.0);
    CHECK(mw_to_dbm(100.0) == doctest::Approx(20.0));
    CHECK(std::isinf(mw_to_dbm(0.0)));
    CHECK(dbm_to_mw(-INFINITY) == 0.0);
    CHECK(dbm_to_mw(10.0) == doctest::Approx(10.0));
}

TEST_CASE("objective of a single agent at the square's center") {
    const std::vector<Point> one{{0.5, 0.5}};
    CHECK(objective_eval(one, 1, ConvexPolygon::rectangle(0, 0, 1, 1), DensityField::uniform()) ==
          doctest::Approx(1.0 / 6.0));
}

TEST_CASE("objective equals its polar-moment decomposition") {
    std::mt19937_64 rng(83);
    const auto S = ConvexPolygon::rectangle(0, 0, 50, 50);
    const auto phi = DensityField::gaussian_mixture({{{20, 30}, 10, 1}, {{40, 10}, 6, 2}});
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3 + trial % 4;
        const int k = 1 + trial % 2;
        const auto pts = testing::random_points(rng, n, 0, 50);
        for (const DensityField& f : {DensityField::uniform(), phi})
            CHECK(objective_eval(pts, k, S, f) == doctest::Approx(polar_decomposition(pts, k, S, f)).epsilon(1e-6));
    }
}

TEST_CASE("moving an agent to its dominant centroid does not increase the objective") {
    std::mt19937_64 rng(89);
    const auto S = ConvexPolygon::rectangle(0, 0, 50, 50);
    const DensityField phi = DensityField::uniform();
    for (int trial = 0; trial < 10; ++trial) {
        auto pts = testing::random_points(rng, 5, 0, 50);
        const auto snap = evaluate_configuration(pts, 2, S, phi);
        const AgentId i = trial % 5;
        const double before = snap.H;
        pts[i] = snap.dominant_centroids[i];
        CHECK(objective_eval(pts, 2, S, phi) <= before + 1e-9 * before);
    }
}

TEST_CASE("service requests count a request and a response per target") {
    WorldState w;
    w.positions = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
    CHECK(service_requests(w, 0, std::vector<AgentId>{}).messages == 0);
    const std::vector<AgentId> others{1, 2, 3, 4};
    const auto r = service_requests(w, 0, others);
    CHECK(r.messages == 8);
    REQUIRE(r.responses.size() == 4);
    CHECK(r.responses[2].id == 3);
    CHECK(r.responses[2].position == Point{3, 0});
    CHECK_THROWS(service_requests(w, 1, std::vector<AgentId>{1}));
    CHECK_THROWS(service_requests(w, 0, std::vector<AgentId>{9}));
}

TEST_CASE("power model") {
    const std::vector<Point> pts{{0, 0}, {10, 0}, {0, 10}};
    PowerModel m;
    CHECK(*power_step(pts, 0, std::vector<AgentId>{1}, m) == doctest::Approx(10.0));
    const double two = *power_step(pts, 0, std::vector<AgentId>{1, 2}, m);
    CHECK(two == doctest::Approx(10.0 * std::log10(2.0 * std::pow(10.0, 1.0))));
    PowerModel doubled = m;
    doubled.alpha = 0.2;
    CHECK(*power_step(pts, 0, std::vector<AgentId>{1, 2}, doubled) > two);
    CHECK_FALSE(power_step(pts, 0, std::vector<AgentId>{}, m).has_value());
}

TEST_CASE("initial positions are seeded and inside the domain") {
    SimConfig c;
    c.domain = ConvexPolygon({{0, 0}, {50, 0}, {0, 50}});
    c.n = 30;
    const auto a = initial_positions(c);
    CHECK(a == initial_positions(c));
    for (Point p : a) CHECK(c.domain.contains(p));
    c.seed = 1;
    CHECK(a != initial_positions(c));
}

TEST_CASE("benchmark mode queries everyone every step and descends") {
    const auto log = run(quick(Mode::benchmark, 150));
    REQUIRE(log.steps.size() == 150);
    CHECK(log.violations.empty());
    double prev = log.initial_H;
    for (const auto& s : log.steps) {
        CHECK(s.messages_step == 2 * 5 * 4);
        CHECK(s.triggered.size() == 5);
        CHECK(s.H <= prev + 1e-6 * log.initial_H);
        prev = s.H;
    }
    CHECK(log.steps.back().messages_cum == 150 * 40);
    CHECK(log.steps.back().H < log.initial_H);
}

TEST_CASE("event and self triggered modes follow identical trajectories") {
    for (std::uint64_t seed : {0u, 5u}) {
        const auto ev = run(quick(Mode::event_triggered, 200, seed));
        const auto st = run(quick(Mode::self_triggered, 200, seed));
        CHECK(ev.violations.empty());
        CHECK(st.violations.empty());
        CHECK(same_log(ev, st));
    }
}

TEST_CASE("runs are deterministic") {
    CHECK(same_log(run(quick(Mode::self_triggered, 80, 9)), run(quick(Mode::self_triggered, 80, 9))));
    CHECK_FALSE(same_log(run(quick(Mode::self_triggered, 20, 9)), run(quick(Mode::self_triggered, 20, 10))));
}

TEST_CASE("triggered runs respect speed, containment and descent") {
    auto c = quick(Mode::self_triggered, 250, 4);
    c.domain = ConvexPolygon({{0, 0}, {50, 0}, {50, 30}, {20, 50}, {0, 40}});
    c.k = 3;
    c.n = 6;
    Simulator sim(c);
    std::vector<Point> prev = sim.world().positions;
    long cum = 0;
    for (int t = 0; t < c.steps; ++t) {
        const auto m = sim.step();
        for (std::size_t i = 0; i < prev.size(); ++i) CHECK(distance(prev[i], m.positions[i]) <= 0.1 + 1e-12);
        CHECK(m.messages_cum >= cum);
        cum = m.messages_cum;
        prev = m.positions;
    }
    CHECK(sim.log().violations.empty());
    for (const auto& s : sim.world().stores) CHECK(s.entries[s.owner].r == 0.0);
}

TEST_CASE("triggering saves messages relative to the benchmark") {
    const auto bench = run(quick(Mode::benchmark, 200));
    const auto ev = run(quick(Mode::event_triggered, 200));
    auto loose = quick(Mode::self_triggered, 200);
    loose.epsilon = 5.0;
    const auto st = run(loose);
    CHECK(bench.steps.back().messages_cum > ev.steps.back().messages_cum);
    CHECK(ev.steps.back().messages_cum > st.steps.back().messages_cum);
    CHECK(st.steps.back().H < st.initial_H);
}

TEST_CASE("the first step of a triggered run informs every agent") {
    Simulator sim(quick(Mode::self_triggered, 1));
    const auto m = sim.step();
    CHECK(m.triggered.size() == 5);
    CHECK(m.messages_step > 0);
    CHECK(m.power_mw > 0.0);
}
