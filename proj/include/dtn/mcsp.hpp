#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtn/constraints.hpp"
#include "dtn/heuristics.hpp"
#include "dtn/operation_graph.hpp"

namespace dtn {

using Clock = std::chrono::steady_clock;

struct Waypoint {
    Vertex v;
    Seconds t = 0.0;         // departure time at depots and packages, stop time at transit vertices
    double flown_km = 0.0;   // cumulative flight distance since the path's first waypoint

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Timed route of one agent for one task: origin, package, destination.
struct AgentPath {
    std::size_t agent = 0;
    std::vector<Waypoint> waypoints;
    std::size_t delivery_index = 0;  // waypoint where the package is dropped

    Seconds depart() const { return waypoints.empty() ? 0.0 : waypoints.front().t; }
    Seconds arrival() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
    double flown_km() const { return waypoints.empty() ? 0.0 : waypoints.back().flown_km; }
};

/// A waypoint reached by flying onto a transit vertex.
bool is_boarding(const OperationGraph& graph, const std::vector<Waypoint>& w, std::size_t i);
/// Stop indices boarded along the path, in order.
std::vector<std::uint32_t> boardings(const OperationGraph& graph, const AgentPath& path);
/// Transit edges (by tail stop) ridden along the path, in order.
std::vector<std::uint32_t> rides(const OperationGraph& graph, const AgentPath& path);
/// Total ground distance covered (flights plus transit legs), km.
double ground_km(const OperationGraph& graph, const AgentPath& path);

/// How many agents board each stop and ride each transit edge.
struct Occupancy {
    std::unordered_map<std::uint32_t, int> boarders;
    std::unordered_map<std::uint32_t, int> riders;

    void add(const OperationGraph& graph, const AgentPath& path);
    int boarders_at(std::uint32_t stop) const;
    int riders_on(std::uint32_t edge_tail) const;
};

enum class SearchStatus { Found, Infeasible, Timeout };

struct SearchOptions {
    double w = 1.0;
    double limit_km = 0.0;
    const ConstraintSet* constraints = nullptr;
    const Occupancy* others = nullptr;  // drives the focal conflict count
    std::optional<Clock::time_point> deadline;
    bool prune = true;
};

struct SearchResult {
    SearchStatus status = SearchStatus::Infeasible;
    std::vector<Waypoint> waypoints;  // flown_km starts at 0
    Seconds lower_bound = 0.0;        // lower bound on the optimal arrival time
    std::size_t expansions = 0;
    int conflicts = 0;

    Seconds arrival() const { return waypoints.back().t; }
};

/// Bounded-suboptimal earliest-arrival search from `start` (at `depart`) to `goal` whose total
/// flight distance stays within `limit_km`.
SearchResult focal_mcsp(const OperationGraph& graph, const Heuristics& h, const Vertex& start, const Vertex& goal,
                        Seconds depart, const SearchOptions& opt);

/// One delivery: origin to package, then package to destination. When resuming mid-route,
/// `prefix` holds the waypoints already committed, ending at `origin`; `delivered` says whether
/// the package is already dropped and `leg_km` is the distance flown on the current leg.
struct AgentTask {
    std::size_t agent = 0;
    Vertex origin;
    Vertex package;
    Vertex destination;
    Seconds depart = 0.0;
    bool delivered = false;
    double leg_km = 0.0;
    std::vector<Waypoint> prefix;
};

struct PlanOptions {
    double w = 1.0;
    const ConstraintSet* constraints = nullptr;
    const Occupancy* others = nullptr;
    std::optional<Clock::time_point> deadline;
    bool prune = true;
};

struct TaskPlan {
    SearchStatus status = SearchStatus::Infeasible;
    AgentPath path;
    Seconds lower_bound = 0.0;  // on the arrival time at the destination
    int failed_leg = 0;         // 1 or 2 when infeasible
    std::size_t expansions = 0;
    std::string reason;
};

/// Plans both legs with half the flight range each and concatenates them. A depot given as
/// the package marks a reposition hop, planned as a single leg with the full range.
TaskPlan plan_task(const OperationGraph& graph, const Heuristics& h, const AgentTask& task, const PlanOptions& opt);

}  // namespace dtn
