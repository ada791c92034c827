#include <random>

#include "doctest.h"
#include "dtn/errors.hpp"
#include "dtn/mapf.hpp"
#include "oracles/search_oracles.hpp"

using namespace dtn;

namespace {

double lon_for_km(double km) { return km / kEarthRadiusKm * 180.0 / 3.141592653589793; }
GeoPoint east(double km) { return {0.0, lon_for_km(km)}; }
TimedStop stop_at(double km, std::int64_t t) { return {"s", 0, east(km), t}; }

AgentTask task(std::size_t agent, Vertex d, Vertex p, Vertex d2, Seconds depart = 0.0) {
    return {agent, d, p, d2, depart};
}

/// Hand path: fly from `from` to board `board`, ride to `alight`, fly to `to`.
AgentPath ride_path(const OperationGraph& g, std::size_t agent, Vertex from, std::uint32_t board,
                    std::uint32_t alight, Vertex to) {
    AgentPath p;
    p.agent = agent;
    double km = 0.0;
    p.waypoints.push_back({from, 0.0, 0.0});
    km += distance(g.location(from), g.location(Vertex::transit(board)));
    for (auto s = board; s <= alight; ++s) p.waypoints.push_back({Vertex::transit(s), g.stop_time(s), km});
    const double last = distance(g.location(Vertex::transit(alight)), g.location(to));
    p.waypoints.push_back({to, g.stop_time(alight) + g.drone().flight_time(last), km + last});
    p.delivery_index = p.waypoints.size() - 1;
    return p;
}

/// A bus with four closely spaced boarding stops, then one long edge out to 9 km.
OperationGraph feeder_line(int long_edge_capacity) {
    TransitTrip bus{"bus", "r",
                    {stop_at(1.0, 300), stop_at(1.2, 345), stop_at(1.4, 390), stop_at(1.6, 435), stop_at(9.0, 2235)}};
    return OperationGraph({bus}, {east(0)}, {east(10)}, DroneSpec{25.0, 7.0}, {4, 4, 4, long_edge_capacity, 4});
}

}  // namespace

TEST_CASE("detect_conflicts") {
    auto g = feeder_line(2);
    const Vertex d = Vertex::depot(0), p = Vertex::package(0);
    SUBCASE("disjoint paths") {
        auto a = ride_path(g, 0, d, 0, 1, p);
        auto b = ride_path(g, 1, d, 2, 3, p);
        CHECK(detect_conflicts(g, {a, b}).empty());
    }
    SUBCASE("shared boarding") {
        auto a = ride_path(g, 0, d, 2, 4, p);
        auto b = ride_path(g, 1, d, 2, 3, p);
        auto c = detect_conflicts(g, {a, b});
        REQUIRE(c.size() == 1);
        CHECK(c[0].kind == Conflict::Kind::Boarding);
        CHECK(c[0].where == 2);
        CHECK(c[0].t == 390.0);
        CHECK(c[0].agents == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("three riders on a two-seat edge") {
        std::vector<AgentPath> paths;
        for (std::uint32_t i = 0; i < 3; ++i) paths.push_back(ride_path(g, i, d, i, 4, p));
        auto c = detect_conflicts(g, paths);
        REQUIRE(c.size() == 1);
        CHECK(c[0].kind == Conflict::Kind::Capacity);
        CHECK(c[0].where == 3);
        CHECK(c[0].overflow == 1);
        CHECK(c[0].agents.size() == 3);
    }
    SUBCASE("earliest conflict first") {
        std::vector<AgentPath> paths{ride_path(g, 0, d, 0, 4, p), ride_path(g, 1, d, 1, 4, p),
                                     ride_path(g, 2, d, 1, 4, p)};
        auto c = detect_conflicts(g, paths);
        REQUIRE(c.size() == 2);
        CHECK(c[0].kind == Conflict::Kind::Boarding);
        CHECK(c[1].kind == Conflict::Kind::Capacity);
    }
}

TEST_CASE("capacity conflicts enumerate every exclusion subset") {
    for (auto [p, c, expected] : {std::tuple{3, 2, 3}, std::tuple{4, 2, 6}, std::tuple{4, 3, 4}}) {
        auto g = feeder_line(c);
        Heuristics h(g);
        std::vector<AgentTask> tasks;
        for (int i = 0; i < p; ++i) tasks.push_back(task(i, Vertex::depot(0), Vertex::package(0), Vertex::depot(0)));
        Ecbs ecbs(g, h, tasks);
        CtNode node;
        node.constraints.assign(p, {});
        node.lower_bounds.assign(p, 0.0);
        for (int i = 0; i < p; ++i)
            node.paths.push_back(ride_path(g, i, Vertex::depot(0), i, 4, Vertex::package(0)));
        auto conflicts = detect_conflicts(g, node.paths);
        REQUIRE(conflicts.size() == 1);
        REQUIRE(conflicts[0].overflow == p - c);
        auto children = ecbs.expand(node, conflicts[0]);
        CHECK(children.size() == static_cast<std::size_t>(expected));
        std::set<std::vector<std::size_t>> distinct;
        for (const auto& ch : children) {
            CHECK(ch.replanned.size() == static_cast<std::size_t>(p - c));
            distinct.insert(ch.replanned);
            for (auto a : ch.replanned) {
                CHECK(ch.node.constraints[a].includes(node.constraints[a]));
                CHECK(ch.node.constraints[a].size() == node.constraints[a].size() + 1);
            }
        }
        CHECK(distinct.size() == children.size());
    }
}

TEST_CASE("boarding conflicts give one child per agent") {
    auto g = feeder_line(4);
    Heuristics h(g);
    std::vector<AgentTask> tasks{task(0, Vertex::depot(0), Vertex::package(0), Vertex::depot(0)),
                                 task(1, Vertex::depot(0), Vertex::package(0), Vertex::depot(0))};
    Ecbs ecbs(g, h, tasks);
    CtNode node;
    node.constraints.assign(2, {});
    node.lower_bounds.assign(2, 0.0);
    node.paths = {ride_path(g, 0, Vertex::depot(0), 1, 4, Vertex::package(0)),
                  ride_path(g, 1, Vertex::depot(0), 1, 4, Vertex::package(0))};
    auto conflicts = detect_conflicts(g, node.paths);
    REQUIRE(conflicts.size() == 1);
    auto children = ecbs.expand(node, conflicts[0]);
    REQUIRE(children.size() == 2);
    CHECK(children[0].node.constraints[0].forbidden_boardings == std::set<std::uint32_t>{1});
    CHECK(children[1].node.constraints[1].forbidden_boardings == std::set<std::uint32_t>{1});
}

TEST_CASE("solve with one agent equals plan_task") {
    auto g = feeder_line(1);
    Heuristics h(g);
    auto t = task(0, Vertex::depot(0), Vertex::package(0), Vertex::package(0));
    auto sol = solve_mapf(g, h, {t}, {1.1});
    auto plan = plan_task(g, h, t, {1.1});
    REQUIRE(plan.status == SearchStatus::Found);
    CHECK(sol.paths[0].waypoints == plan.path.waypoints);
    CHECK(sol.makespan == plan.path.arrival());
}

TEST_CASE("two agents contend for one seat") {
    // Two identical buses 20 minutes apart, one seat each. Both agents need a bus.
    TransitTrip early{"early", "r", {stop_at(1, 300), stop_at(9, 2100)}};
    TransitTrip late{"late", "r", {stop_at(1, 1500), stop_at(9, 3300)}};
    const DroneSpec drone{25.0, 7.0};
    OperationGraph g({early, late}, {east(0), east(11)}, {east(10), east(10.2)}, drone, {1, 1, 1, 1});
    Heuristics h(g);
    std::vector<AgentTask> tasks{task(0, Vertex::depot(0), Vertex::package(0), Vertex::depot(1)),
                                 task(1, Vertex::depot(0), Vertex::package(1), Vertex::depot(1))};
    auto sol = solve_mapf(g, h, tasks, {1.1});
    CHECK(validate_solution(g, sol.paths).ok());
    auto b0 = boardings(g, sol.paths[0]), b1 = boardings(g, sol.paths[1]);
    REQUIRE(b0.size() == 1);
    REQUIRE(b1.size() == 1);
    CHECK(b0[0] != b1[0]);

    const auto stops = oracle::flatten(g.trips());
    std::vector<std::vector<oracle::LegPath>> options;
    for (const auto& t : tasks)
        options.push_back(oracle::enumerate_tasks(stops, drone, g.location(t.origin), g.location(t.package),
                                                  g.location(t.destination), 0.0));
    const double opt = oracle::joint_optimum(options, {1, 1, 1, 1});
    CHECK(sol.makespan <= 1.1 * opt + 1e-9);
    CHECK(sol.makespan >= opt - 1e-9);
}

TEST_CASE("ECBS on random 2-agent fixtures against the joint optimum") {
    std::mt19937_64 rng(77);
    int solved = 0, conflicted = 0;
    for (int trial = 0; trial < 30; ++trial) {
        auto f = oracle::corridor_fixture(rng, 2, 2 + rng() % 3);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone, f.capacities);
        Heuristics h(g);
        std::vector<AgentTask> tasks{task(0, Vertex::depot(0), Vertex::package(0), Vertex::depot(1)),
                                     task(1, Vertex::depot(0), Vertex::package(1), Vertex::depot(1))};
        const auto stops = oracle::flatten(f.trips);
        std::vector<std::vector<oracle::LegPath>> options;
        for (const auto& t : tasks)
            options.push_back(oracle::enumerate_tasks(stops, f.drone, g.location(t.origin), g.location(t.package),
                                                      g.location(t.destination), 0.0));
        const double opt = oracle::joint_optimum(options, f.capacities);
        if (opt == oracle::kNever) {
            CHECK_THROWS_AS(solve_mapf(g, h, tasks, {1.1}), InfeasibleError);
            continue;
        }
        auto sol = solve_mapf(g, h, tasks, {1.1});
        ++solved;
        if (sol.stats.conflicts_resolved > 0) ++conflicted;
        CHECK(validate_solution(g, sol.paths).ok());
        CHECK(sol.makespan <= 1.1 * opt + 1e-9);
    }
    MESSAGE("solved " << solved << ", with conflicts " << conflicted);
}

TEST_CASE("ECBS on random 3-4 agent fixtures validates") {
    std::mt19937_64 rng(5);
    int solved = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 3 + rng() % 2;
        auto f = oracle::corridor_fixture(rng, m, 3 + rng() % 3);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone, f.capacities);
        Heuristics h(g);
        std::vector<AgentTask> tasks;
        for (std::size_t i = 0; i < m; ++i) tasks.push_back(task(i, Vertex::depot(0), Vertex::package(i), Vertex::depot(1)));
        try {
            auto sol = solve_mapf(g, h, tasks, {1.1});
            auto report = validate_solution(g, sol.paths);
            CHECK(report.ok());
            ++solved;
        } catch (const InfeasibleError&) {
        }
    }
    MESSAGE("solved " << solved << " of 10");
}

TEST_CASE("validate_solution flags corruption") {
    auto g = feeder_line(1);
    Heuristics h(g);
    auto sol = solve_mapf(g, h, {task(0, Vertex::depot(0), Vertex::package(0), Vertex::package(0))});
    REQUIRE(validate_solution(g, sol.paths).ok());
    SUBCASE("range exceeded") {
        auto paths = sol.paths;
        for (auto& w : paths[0].waypoints) w.flown_km *= 10.0;
        paths[0].waypoints.back().flown_km = 8.0;
        CHECK_FALSE(validate_solution(g, paths).ok());
    }
    SUBCASE("duplicated boarding") {
        auto paths = sol.paths;
        paths.push_back(paths[0]);
        paths[1].agent = 1;
        auto report = validate_solution(g, paths);
        CHECK_FALSE(report.ok());
        bool boarding = false;
        for (const auto& v : report.violations) boarding = boarding || v.find("boarded by 2") != std::string::npos;
        CHECK(boarding);
    }
    SUBCASE("same agent never conflicts with itself") {
        auto paths = sol.paths;
        paths.push_back(paths[0]);
        auto report = validate_solution(g, paths);
        for (const auto& v : report.violations) CHECK(v.find("boarded by") == std::string::npos);
    }
}

TEST_CASE("infeasible task names the agent") {
    OperationGraph g({}, {east(0)}, {east(1), east(20)}, DroneSpec{25.0, 7.0});
    Heuristics h(g);
    try {
        solve_mapf(g, h,
                   {task(0, Vertex::depot(0), Vertex::package(0), Vertex::depot(0)),
                    task(1, Vertex::depot(0), Vertex::package(1), Vertex::depot(0))});
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        REQUIRE(e.agent());
        CHECK(*e.agent() == 1);
    }
}

TEST_CASE("ECBS is deterministic and honours background occupancy") {
    TransitTrip early{"early", "r", {stop_at(1, 300), stop_at(9, 2100)}};
    TransitTrip late{"late", "r", {stop_at(1, 1500), stop_at(9, 3300)}};
    OperationGraph g({early, late}, {east(0), east(11)}, {east(10), east(10.2)}, DroneSpec{25.0, 7.0}, {1, 1, 1, 1});
    Heuristics h(g);
    std::vector<AgentTask> tasks{task(0, Vertex::depot(0), Vertex::package(0), Vertex::depot(1)),
                                 task(1, Vertex::depot(0), Vertex::package(1), Vertex::depot(1))};
    auto a = solve_mapf(g, h, tasks), b = solve_mapf(g, h, tasks);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.paths[i].waypoints == b.paths[i].waypoints);
    CHECK(a.makespan == b.makespan);

    auto blocker = ride_path(g, 7, Vertex::depot(0), 0, 1, Vertex::package(1));
    auto one = solve_mapf(g, h, {tasks[0]}, {}, {blocker});
    CHECK(boardings(g, one.paths[0]) == std::vector<std::uint32_t>{2});
    CHECK(validate_solution(g, {one.paths[0], blocker}).ok());
}
