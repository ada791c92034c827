// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "dtn/errors.hpp"
#include "dtn/pipeline.hpp"
#include "oracles/allocation_oracles.hpp"
#include "oracles/search_oracles.hpp"

using namespace dtn;
namespace fs = std::filesystem;

namespace {

using Stopwatch = std::chrono::steady_clock;

double elapsed(Stopwatch::time_point t0) { return std::chrono::duration<double>(Stopwatch::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_s;  // wall-clock limit, 0 for none
    std::function<Outcome()> run;
};

std::string str(double v, int digits = 3) {
    char b[64];
    std::snprintf(b, sizeof b, "%.*f", digits, v);
    return b;
}

// Random allocation instances shared by the bound and ratio checks.
struct BoundInstance {
    AllocationGraph graph;
    std::size_t m;
    AllocationResult result;
    double opt;
};

const std::vector<BoundInstance>& bound_instances() {
    static const std::vector<BoundInstance> instances = [] {
        std::vector<BoundInstance> out;
        std::mt19937_64 rng(1001);
        while (out.size() < 50) {
            const std::size_t l = 1 + rng() % 3, k = 1 + rng() % 7, m = 1 + rng() % 3;
            auto g = oracle::random_allocation_graph(rng, l, k);
            auto r = merge_split_tours(g, m);
            const double opt = oracle::mvp_brute_force(g, m);
            out.push_back({std::move(g), m, std::move(r), opt});
        }
        return out;
    }();
    return instances;
}

Outcome allocation_bound() {
    std::size_t held = 0;
    double slack = oracle::kInf;
    for (const auto& in : bound_instances()) {
        const double limit = in.opt + in.result.bound.alpha + in.result.bound.beta;
        if (in.result.bound.makespan <= limit) ++held;
        slack = std::min(slack, limit - in.result.bound.makespan);
    }
    const auto n = bound_instances().size();
    return {held == n, std::to_string(held) + "/" + std::to_string(n) + " instances, min slack " + str(slack)};
}

Outcome approximation_ratio() {
    double worst = 0.0, worst_allowed = 0.0;
    std::size_t held = 0, counted = 0;
    for (const auto& in : bound_instances()) {
        if (in.opt <= 0.0) continue;  // no packages: ratio undefined
        ++counted;
        const double ratio = in.result.bound.makespan / in.opt;
        const double allowed = (in.opt + in.result.bound.alpha + in.result.bound.beta) / in.opt;
        if (ratio <= allowed) ++held;
        if (ratio > worst) worst = ratio, worst_allowed = allowed;
    }
    return {held == counted, std::to_string(held) + "/" + std::to_string(counted) + " instances, worst ratio " +
                                 str(worst) + " (allowed " + str(worst_allowed) + ")"};
}

struct MctInstance {
    AllocationGraph graph;
    MCTSolution sol;
};

const std::vector<MctInstance>& mct_instances() {
    static const std::vector<MctInstance> instances = [] {
        std::vector<MctInstance> out;
        std::mt19937_64 rng(2002);
        for (int i = 0; i < 100; ++i) {
            const std::size_t l = 1 + rng() % 3, k = rng() % 7;
            auto g = oracle::random_allocation_graph(rng, l, k, 0.3);
            auto sol = solve_mct(g);
            out.push_back({std::move(g), std::move(sol)});
        }
        return out;
    }();
    return instances;
}

Outcome circulation_integrality() {
    std::size_t ok = 0;
    double worst = 0.0;
    for (const auto& in : mct_instances()) {
        const auto& g = in.graph;
        double objective = 0.0;
        bool valid = true;
        for (std::size_t u = 0; u < g.size(); ++u)
            for (std::size_t v = 0; v < g.size(); ++v) {
                const int x = in.sol.at(u, v);
                if (x < 0 || (x > 0 && !g.has_edge(u, v))) valid = false;
                if (x > 0) objective += x * g.cost(u, v);
            }
        try {
            check_mct(g, in.sol);
        } catch (const ValidationError&) {
            valid = false;
        }
        const double exact = oracle::mct_brute_force(g);
        const auto relaxed = oracle::mct_lp_relaxation(g);
        const double scale = std::max(1.0, std::abs(exact));
        const double err = std::max({std::abs(in.sol.objective - exact), std::abs(objective - exact),
                                     std::abs(relaxed.objective - exact)}) / scale;
        worst = std::max(worst, err);
        if (valid && err <= 1e-9) ++ok;
    }
    return {ok == mct_instances().size(),
            std::to_string(ok) + "/100 integral and optimal, worst relative gap " + str(worst, 12)};
}

Outcome tour_decomposition() {
    std::size_t ok = 0;
    for (const auto& in : mct_instances()) {
        const auto& g = in.graph;
        const auto tours = extract_tours(g, in.sol);
        std::map<std::pair<std::uint32_t, std::uint32_t>, int> used;
        std::vector<int> visits(g.size(), 0);
        for (const auto& t : tours) {
            const auto& v = t.vertices;
            for (std::size_t i = 0; i < v.size(); ++i) {
                ++used[{v[i], v[(i + 1) % v.size()]}];
                if (!g.is_depot(v[i])) ++visits[v[i]];
            }
        }
        bool exact = true;
        for (std::size_t u = 0; u < g.size(); ++u)
            for (std::size_t v = 0; v < g.size(); ++v) {
                auto it = used.find({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
                if ((it == used.end() ? 0 : it->second) != in.sol.at(u, v)) exact = false;
            }
        for (std::size_t p = g.num_depots(); p < g.size(); ++p)
            if (visits[p] != 1) exact = false;
        if (exact) ++ok;
    }
    return {ok == mct_instances().size(), std::to_string(ok) + "/100 decompositions exact"};
}

oracle::Leg leg_of(const OperationGraph& g, const Vertex& a, const Vertex& b, Seconds depart, double limit) {
    return {g.location(a), depart, g.location(b), limit, {}, {}};
}

Outcome focal_bound() {
    std::mt19937_64 rng(3003);
    std::size_t checks = 0, held = 0, feasible = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto f = oracle::random_fixture(rng, 2 + rng() % 4, 7, 2, 2, 8.0, 7.0);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone, f.capacities);
        Heuristics h(g);
        const auto stops = oracle::flatten(f.trips);
        const Vertex a = Vertex::depot(rng() % 2), b = Vertex::package(rng() % 2);
        const double limit = 1.0 + static_cast<double>(rng() % 40) / 10.0;
        const Seconds depart = static_cast<double>(rng() % 300);
        const auto opt = oracle::single_leg_optimum(stops, f.drone.speed_km_per_s(), leg_of(g, a, b, depart, limit));
        if (opt.arrival != oracle::kNever) ++feasible;
        for (double w : {1.0, 1.1, 2.0}) {
            ++checks;
            const auto r = focal_mcsp(g, h, a, b, depart, {w, limit});
            if (opt.arrival == oracle::kNever) {
                held += r.status == SearchStatus::Infeasible;
                continue;
            }
            if (r.status != SearchStatus::Found) continue;
            const double spent = r.arrival() - depart, best = opt.arrival - depart;
            if (spent <= w * best + 1e-9 && r.waypoints.back().flown_km <= limit + 1e-9) ++held;
            if (best > 0.0) worst = std::max(worst, spent / best / w);
        }
    }
    return {held == checks, std::to_string(held) + "/" + std::to_string(checks) + " runs (" + std::to_string(feasible) +
                                "/200 feasible), worst time/(w*opt) " + str(worst, 6)};
}

Outcome pruning_equivalence() {
    std::mt19937_64 rng(4004);
    std::size_t same = 0, found = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto f = oracle::random_fixture(rng, 3 + rng() % 3, 7, 1, 1, 8.0, 6.0);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone);
        Heuristics h(g);
        SearchOptions pruned{1.0, 3.0}, full{1.0, 3.0};
        full.prune = false;
        const auto a = focal_mcsp(g, h, Vertex::depot(0), Vertex::package(0), 0.0, pruned);
        const auto b = focal_mcsp(g, h, Vertex::depot(0), Vertex::package(0), 0.0, full);
        if (a.status != b.status) continue;
        if (a.status == SearchStatus::Found) {
            ++found;
            if (a.arrival() != b.arrival()) continue;
        }
        ++same;
    }
    return {same == 100, std::to_string(same) + "/100 identical (" + std::to_string(found) + " feasible)"};
}

Outcome heuristic_admissibility() {
    std::mt19937_64 rng(5005);
    std::size_t time_ok = 0, dist_ok = 0;
    for (int q = 0; q < 100; ++q) {
        auto f = oracle::random_fixture(rng, 4, 6, 2, 2, 8.0, 7.0);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone);
        Heuristics h(g);
        const auto stops = oracle::flatten(f.trips);
        const Vertex a = Vertex::depot(rng() % 2), b = Vertex::package(rng() % 2);
        const auto opt = oracle::single_leg_optimum(stops, f.drone.speed_km_per_s(), leg_of(g, a, b, 0.0, oracle::kNever));
        time_ok += h.time(a, b) <= opt.arrival + 1e-9;
        dist_ok += h.dist(a, b) <= opt.min_km + 1e-9;
    }
    return {time_ok == 100 && dist_ok == 100,
            "h_time " + std::to_string(time_ok) + "/100, h_dist " + std::to_string(dist_ok) + "/100"};
}

AgentTask delivery(std::size_t agent, Vertex d, Vertex p, Vertex d2) { return {agent, d, p, d2, 0.0}; }

Outcome ecbs_bound() {
    std::mt19937_64 rng(6006);
    std::size_t ok = 0, solved = 0, conflicted = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        auto f = oracle::corridor_fixture(rng, 2, 2 + rng() % 3);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone, f.capacities);
        Heuristics h(g);
        std::vector<AgentTask> tasks{delivery(0, Vertex::depot(0), Vertex::package(0), Vertex::depot(1)),
                                     delivery(1, Vertex::depot(0), Vertex::package(1), Vertex::depot(1))};
        const auto stops = oracle::flatten(f.trips);
        std::vector<std::vector<oracle::LegPath>> options;
        for (const auto& t : tasks)
            options.push_back(oracle::enumerate_tasks(stops, f.drone, g.location(t.origin), g.location(t.package),
                                                      g.location(t.destination), 0.0));
        const double opt = oracle::joint_optimum(options, f.capacities);
        try {
            const auto sol = solve_mapf(g, h, tasks, {1.1});
            if (opt == oracle::kNever) continue;
            ++solved;
            conflicted += sol.stats.conflicts_resolved > 0;
            worst = std::max(worst, sol.makespan / opt);
            if (validate_solution(g, sol.paths).ok() && sol.makespan <= 1.1 * opt + 1e-9) ++ok;
        } catch (const InfeasibleError&) {
            ok += opt == oracle::kNever;
        }
    }
    std::size_t validated = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 3 + rng() % 2;
        auto f = oracle::corridor_fixture(rng, m, 4 + rng() % 3);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone, f.capacities);
        Heuristics h(g);
        std::vector<AgentTask> tasks;
        for (std::size_t i = 0; i < m; ++i)
            tasks.push_back(delivery(i, Vertex::depot(0), Vertex::package(static_cast<std::uint32_t>(i)), Vertex::depot(1)));
        try {
            validated += validate_solution(g, solve_mapf(g, h, tasks, {1.1}).paths).ok();
        } catch (const InfeasibleError&) {
            ++validated;  // nothing to validate; reported as infeasible
        }
    }
    return {ok == 30 && validated == 10,
            "2-agent " + std::to_string(ok) + "/30 (" + std::to_string(solved) + " solved, " + std::to_string(conflicted) +
                " with conflicts, worst makespan/OPT " + str(worst, 4) + "), 3-4 agent " + std::to_string(validated) +
                "/10 valid"};
}

Outcome capacity_enumeration() {
    const double kmdeg = 1.0 / 111.195;
    auto at = [&](double km) { return GeoPoint{0.0, km * kmdeg}; };
    std::string detail;
    bool pass = true;
    for (auto [p, c, expected] : {std::tuple{3, 2, 3}, std::tuple{4, 2, 6}, std::tuple{4, 3, 4}}) {
        TransitTrip bus{"bus", "r",
                        {{"a", 1, at(1.0), 300}, {"b", 2, at(1.2), 345}, {"c", 3, at(1.4), 390}, {"d", 4, at(1.6), 435},
                         {"e", 5, at(9.0), 2235}}};
        OperationGraph g({bus}, {at(0)}, {at(10)}, DroneSpec{25.0, 7.0}, {4, 4, 4, c, 4});
        Heuristics h(g);
        std::vector<AgentTask> tasks;
        CtNode node;
        for (int i = 0; i < p; ++i) {
            tasks.push_back(delivery(i, Vertex::depot(0), Vertex::package(0), Vertex::depot(0)));
            AgentPath path;
            path.agent = i;
            double km = distance(at(0), g.location(Vertex::transit(i)));
            path.waypoints.push_back({Vertex::depot(0), 0.0, 0.0});
            for (std::uint32_t s = i; s <= 4; ++s) path.waypoints.push_back({Vertex::transit(s), g.stop_time(s), km});
            km += distance(at(9.0), at(10));
            path.waypoints.push_back({Vertex::package(0), g.stop_time(4) + g.drone().flight_time(1.0), km});
            path.delivery_index = path.waypoints.size() - 1;
            node.paths.push_back(path);
        }
        node.constraints.assign(p, {});
        node.lower_bounds.assign(p, 0.0);
        Ecbs ecbs(g, h, tasks);
        const auto conflicts = detect_conflicts(g, node.paths);
        const std::size_t n = conflicts.size() == 1 ? ecbs.expand(node, conflicts[0]).size() : 0;
        pass = pass && n == static_cast<std::size_t>(expected);
        detail += "(" + std::to_string(p) + "," + std::to_string(c) + ")->" + std::to_string(n) + " ";
    }
    return {pass, detail + "children"};
}

// One single-agent shuttle per agent, 20 km apart so no stop is within reach of two lanes.
// Packages and depots of lane i sit at indices 2i and 2i+1.
oracle::Fixture separate_lanes(std::mt19937_64& rng, std::size_t agents) {
    oracle::Fixture all;
    for (std::size_t i = 0; i < agents; ++i) {
        auto lane = oracle::shuttle_fixture(rng, 1, 3);
        const double shift = 20.0 * static_cast<double>(i) / 111.195;
        for (auto& t : lane.trips) {
            t.trip_id += "_" + std::to_string(i);
            for (auto& st : t.stops) st.location.lat += shift;
        }
        for (auto& p : lane.packages) p.lat += shift;
        for (auto& d : lane.depots) d.lat += shift;
        all.drone = lane.drone;
        all.trips.insert(all.trips.end(), lane.trips.begin(), lane.trips.end());
        all.packages.insert(all.packages.end(), lane.packages.begin(), lane.packages.end());
        all.depots.insert(all.depots.end(), lane.depots.begin(), lane.depots.end());
        all.capacities.insert(all.capacities.end(), lane.capacities.begin(), lane.capacities.end());
    }
    return all;
}

Outcome replanning_dominance() {
    std::mt19937_64 rng(7007);
    std::size_t runs = 0, held = 0, equal_needed = 0, equal_held = 0, strict = 0;
    int attempts = 0;
    while (runs < 20 && attempts < 200) {
        ++attempts;
        const std::size_t m = 2 + rng() % 2;
        const bool separate = attempts % 2 == 0;
        const auto f = separate ? separate_lanes(rng, m) : oracle::shuttle_fixture(rng, m, 3);
        OperationGraph g(f.trips, f.depots, f.packages, f.drone, f.capacities);
        Heuristics h(g);
        std::vector<std::vector<TaskSpec>> seq(m);
        for (std::uint32_t i = 0; i < m; ++i) {
            const auto m32 = static_cast<std::uint32_t>(m);
            const Vertex d0 = Vertex::depot(separate ? 2 * i : 0), d1 = Vertex::depot(separate ? 2 * i + 1 : 1);
            seq[i].push_back({d0, Vertex::package(separate ? 2 * i : i), d1});
            seq[i].push_back({d1, Vertex::package(separate ? 2 * i + 1 : m32 + i), d0});
        }
        ExecutionLog one, all;
        try {
            one = run_horizon(g, h, seq, {Strategy::ReplanOne, {1.0}});
            all = run_horizon(g, h, seq, {Strategy::ReplanAll, {1.0}});
        } catch (const InfeasibleError&) {
            continue;  // fixture without a feasible schedule, draw another
        }
        ++runs;
        held += one.makespan >= all.makespan;
        strict += one.makespan > all.makespan;
        if (one.conflicts_resolved == 0 && all.conflicts_resolved == 0 && one.escalations == 0) {
            ++equal_needed;
            equal_held += one.makespan == all.makespan;
        }
    }
    return {runs == 20 && held == runs && equal_held == equal_needed,
            std::to_string(held) + "/" + std::to_string(runs) + " paired runs dominate (" + std::to_string(strict) +
                " strictly), " + std::to_string(equal_held) + "/" + std::to_string(equal_needed) +
                " conflict-free runs equal"};
}

Outcome allocation_scaling() {
    auto mean_time = [](std::size_t k) {
        double total = 0.0;
        const int reps = 5;
        for (int r = 0; r < reps; ++r) {
            std::mt19937_64 rng(8000 + r);
            const auto g = oracle::random_allocation_graph(rng, 5, k);
            const auto t0 = Stopwatch::now();
            const auto res = merge_split_tours(g, 10);
            total += elapsed(t0);
            if (res.paths.size() != 10) throw std::logic_error("unexpected path count");
        }
        return total / reps;
    };
    mean_time(100);  // warm-up
    const double t100 = mean_time(100), t200 = mean_time(200);
    const double ratio = t200 / t100;
    return {ratio < 8.0, "k=100 " + str(t100 * 1e3) + " ms, k=200 " + str(t200 * 1e3) + " ms, ratio " + str(ratio, 2)};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

Outcome pipeline_determinism() {
    const auto config = load_config(fs::path(DTN_TEST_DATA) / "grid_config.json");
    const auto root = fs::temp_directory_path() / "dtn_acceptance_determinism";
    fs::remove_all(root);
    for (const char* name : {"a", "b"}) write_outputs(run_pipeline(config, Stage::Simulate), root / name);
    std::string detail;
    bool pass = true;
    for (const char* f : {"routes.geojson", "stats.csv"}) {
        const auto a = slurp(root / "a" / f), b = slurp(root / "b" / f);
        const bool same = !a.empty() && a == b;
        pass = pass && same;
        detail += std::string(f) + (same ? " identical (" + std::to_string(a.size()) + " bytes) " : " DIFFERS ");
    }
    fs::remove_all(root);
    return {pass, detail};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"allocation makespan within OPT + alpha + beta", 60.0, allocation_bound},
        {"circulation solution integral and optimal", 30.0, circulation_integrality},
        {"tour extraction reproduces edge multiplicities", 0.0, tour_decomposition},
        {"focal search within w of the constrained optimum", 60.0, focal_bound},
        {"pruned neighbors keep the optimum", 0.0, pruning_equivalence},
        {"time and distance heuristics admissible", 0.0, heuristic_admissibility},
        {"ECBS valid and within 1.1 of the joint optimum", 120.0, ecbs_bound},
        {"capacity conflicts yield binomial child counts", 0.0, capacity_enumeration},
        {"Replan-m never worse than Replan-1", 0.0, replanning_dominance},
        {"allocation runtime ratio k=100 to 200 below 8x", 120.0, allocation_scaling},
        {"approximation ratio within the additive bound", 0.0, approximation_ratio},
        {"pipeline outputs byte-identical per seed", 0.0, pipeline_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = Stopwatch::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double took = elapsed(t0);
        if (c.budget_s > 0.0 && took > c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + str(c.budget_s, 0) + " s budget";
        }
        failed += !o.pass;
        std::printf("%s  %2zu  %-50s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, c.name.c_str(), o.detail.c_str(), took);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
