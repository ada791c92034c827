#include "dtn/mapf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "dtn/errors.hpp"

namespace dtn {

namespace {

constexpr double kSlack = 1e-9;

/// Every k-subset of `items`, in lexicographic order.
std::vector<std::vector<std::size_t>> subsets_of_size(const std::vector<std::size_t>& items, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> pick;
    auto rec = [&](auto&& self, std::size_t from) -> void {
        if (pick.size() == k) {
            out.push_back(pick);
            return;
        }
        for (std::size_t i = from; i + (k - pick.size()) <= items.size(); ++i) {
            pick.push_back(items[i]);
            self(self, i + 1);
            pick.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace

std::vector<Conflict> detect_conflicts(const OperationGraph& graph, const std::vector<AgentPath>& paths,
                                       const Occupancy* background) {
    std::map<std::uint32_t, std::vector<std::size_t>> boarders, riders;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        for (auto s : boardings(graph, paths[i])) boarders[s].push_back(i);
        for (auto e : rides(graph, paths[i])) riders[e].push_back(i);
    }
    std::vector<Conflict> out;
    for (auto& [stop, agents] : boarders) {
        if (agents.size() < 2) continue;
        Conflict c;
        c.kind = Conflict::Kind::Boarding;
        c.where = stop;
        c.t = graph.stop_time(stop);
        c.agents = agents;
        out.push_back(std::move(c));
    }
    for (auto& [edge, agents] : riders) {
        const int seats = graph.capacity(edge) - (background ? background->riders_on(edge) : 0);
        if (static_cast<int>(agents.size()) <= seats) continue;
        Conflict c;
        c.kind = Conflict::Kind::Capacity;
        c.where = edge;
        c.t = graph.stop_time(edge);
        c.agents = agents;
        c.capacity = std::max(seats, 0);
        c.overflow = static_cast<int>(agents.size()) - c.capacity;
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const Conflict& a, const Conflict& b) {
        return std::tie(a.t, a.kind, a.where) < std::tie(b.t, b.kind, b.where);
    });
    return out;
}

Ecbs::Ecbs(const OperationGraph& graph, const Heuristics& h, std::vector<AgentTask> tasks, EcbsOptions opt,
           const std::vector<AgentPath>& background)
    : graph_(graph), h_(h), tasks_(std::move(tasks)), opt_(opt) {
    if (opt_.w < 1.0) throw InputError("suboptimality factor must be at least 1");
    if (tasks_.empty()) throw InputError("at least one task is required");
    std::set<std::size_t> planned;
    for (const auto& t : tasks_) planned.insert(t.agent);
    for (const auto& p : background)
        if (!planned.contains(p.agent)) background_.add(graph_, p);
    for (const auto& [stop, n] : background_.boarders) base_.forbidden_boardings.insert(stop);
    for (const auto& [edge, n] : background_.riders)
        if (n >= graph_.capacity(edge)) base_.excluded_edges.insert(edge);
    t_ref_ = tasks_.front().depart;
    for (const auto& t : tasks_) t_ref_ = std::min(t_ref_, t.depart);
}

bool Ecbs::replan(CtNode& node, std::size_t agent) {
    Occupancy others;
    for (std::size_t j = 0; j < node.paths.size(); ++j)
        if (j != agent && !node.paths[j].waypoints.empty()) others.add(graph_, node.paths[j]);
    PlanOptions po{opt_.w, &node.constraints[agent], &others, opt_.deadline, opt_.prune};
    auto plan = plan_task(graph_, h_, tasks_[agent], po);
    stats_.low_level_expansions += plan.expansions;
    if (plan.status == SearchStatus::Timeout) throw TimeoutError("low-level search timed out");
    if (plan.status != SearchStatus::Found) return false;
    node.paths[agent] = std::move(plan.path);
    node.lower_bounds[agent] = plan.lower_bound;
    return true;
}

void Ecbs::finish(CtNode& node) {
    node.cost = t_ref_;
    node.lower_bound = t_ref_;
    for (std::size_t i = 0; i < node.paths.size(); ++i) {
        node.cost = std::max(node.cost, node.paths[i].arrival());
        node.lower_bound = std::max(node.lower_bound, node.lower_bounds[i]);
    }
    node.num_conflicts = conflicts_of(node).size();
    node.id = next_id_++;
    ++stats_.nodes_generated;
}

const std::vector<Conflict> Ecbs::conflicts_of(const CtNode& node) const {
    return detect_conflicts(graph_, node.paths, &background_);
}

CtNode Ecbs::root() {
    CtNode node;
    const std::size_t m = tasks_.size();
    node.constraints.assign(m, base_);
    node.paths.resize(m);
    node.lower_bounds.assign(m, t_ref_);
    for (std::size_t i = 0; i < m; ++i) {
        if (!replan(node, i)) {
            std::ostringstream msg;
            msg << "agent " << tasks_[i].agent << " has no feasible route for its task";
            throw InfeasibleError(msg.str(), tasks_[i].agent);
        }
    }
    finish(node);
    return node;
}

std::vector<CtChild> Ecbs::expand(const CtNode& node, const Conflict& conflict) {
    std::vector<std::vector<std::size_t>> groups;
    if (conflict.kind == Conflict::Kind::Boarding || opt_.split_single_overflow) {
        for (auto a : conflict.agents) groups.push_back({a});
    } else {
        groups = subsets_of_size(conflict.agents, static_cast<std::size_t>(conflict.overflow));
    }
    std::vector<CtChild> out;
    for (const auto& group : groups) {
        CtChild child{node, true, group};
        for (auto a : group) {
            auto& c = child.node.constraints[a];
            if (conflict.kind == Conflict::Kind::Boarding) c.forbidden_boardings.insert(conflict.where);
            else c.excluded_edges.insert(conflict.where);
        }
        for (auto a : group) {
            if (!replan(child.node, a)) {
                child.feasible = false;
                break;
            }
        }
        if (child.feasible) finish(child.node);
        out.push_back(std::move(child));
    }
    return out;
}

MultiAgentSolution Ecbs::solve() {
    std::vector<CtNode> nodes;
    std::set<std::pair<Seconds, std::size_t>> open, by_cost;
    std::set<std::tuple<std::size_t, Seconds, std::size_t>> focal;
    double gate = -std::numeric_limits<double>::infinity();

    auto add = [&](CtNode n) {
        const auto slot = nodes.size();
        open.insert({n.lower_bound, slot});
        by_cost.insert({n.cost, slot});
        if (n.cost <= gate) focal.insert({n.num_conflicts, n.cost, slot});
        nodes.push_back(std::move(n));
    };
    auto remove = [&](std::size_t slot) {
        const auto& n = nodes[slot];
        open.erase({n.lower_bound, slot});
        by_cost.erase({n.cost, slot});
        focal.erase({n.num_conflicts, n.cost, slot});
    };
    auto refresh = [&] {
        const double lb = open.begin()->first;
        const double next = t_ref_ + opt_.w * (lb - t_ref_) + kSlack;
        if (next > gate) {
            for (auto it = by_cost.upper_bound({gate, SIZE_MAX}); it != by_cost.end() && it->first <= next; ++it)
                focal.insert({nodes[it->second].num_conflicts, it->first, it->second});
        } else if (next < gate) {
            for (auto it = by_cost.upper_bound({next, SIZE_MAX}); it != by_cost.end() && it->first <= gate; ++it)
                focal.erase({nodes[it->second].num_conflicts, it->first, it->second});
        }
        gate = next;
    };

    add(root());
    while (!open.empty()) {
        if (opt_.deadline && Clock::now() > *opt_.deadline) throw TimeoutError("conflict-tree search timed out");
        refresh();
        const Seconds lb = open.begin()->first;
        std::size_t slot;
        if (!focal.empty()) slot = std::get<2>(*focal.begin());
        else slot = open.begin()->second;
        remove(slot);
        const auto conflicts = conflicts_of(nodes[slot]);
        if (conflicts.empty()) {
            MultiAgentSolution sol;
            sol.paths = nodes[slot].paths;
            sol.makespan = nodes[slot].cost;
            sol.lower_bound = lb;
            stats_.bound_certified = nodes[slot].cost <= gate;
            sol.stats = stats_;
            return sol;
        }
        ++stats_.nodes_expanded;
        ++stats_.conflicts_resolved;
        for (auto& child : expand(nodes[slot], conflicts.front()))
            if (child.feasible) add(std::move(child.node));
    }
    throw InfeasibleError("no conflict-free joint plan exists");
}

MultiAgentSolution solve_mapf(const OperationGraph& graph, const Heuristics& h, const std::vector<AgentTask>& tasks,
                              const EcbsOptions& opt, const std::vector<AgentPath>& background) {
    Ecbs ecbs(graph, h, tasks, opt, background);
    return ecbs.solve();
}

ValidationReport validate_solution(const OperationGraph& graph, const std::vector<AgentPath>& paths) {
    ValidationReport report;
    auto fail = [&](std::size_t i, const std::string& what) {
        report.violations.push_back("path " + std::to_string(i) + " (agent " + std::to_string(paths[i].agent) +
                                    "): " + what);
    };
    const double sigma = graph.drone().speed_km_per_s();
    std::map<std::uint32_t, std::set<std::size_t>> boarded_by;
    std::map<std::uint32_t, int> load;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& w = paths[i].waypoints;
        if (w.empty()) continue;
        if (w.front().flown_km != 0.0) fail(i, "does not start with zero flight distance");
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (!graph.contains(w[j].v)) {
                fail(i, "waypoint " + std::to_string(j) + " is not in the graph");
                return report;
            }
            if (w[j].v.is_transit() && w[j].t != graph.stop_time(w[j].v.index))
                fail(i, "waypoint " + std::to_string(j) + " is off the timetable");
        }
        for (std::size_t j = 1; j < w.size(); ++j) {
            const auto& a = w[j - 1];
            const auto& b = w[j];
            if (b.t < a.t) fail(i, "time decreases at waypoint " + std::to_string(j));
            if (graph.is_ride(a.v, b.v)) {
                if (std::abs(b.flown_km - a.flown_km) > 1e-9) fail(i, "ride leg consumes flight distance");
                continue;
            }
            const double d = distance(graph.location(a.v), graph.location(b.v));
            if (std::abs(b.flown_km - a.flown_km - d) > 1e-6) fail(i, "flight distance bookkeeping is off");
            if (b.v.is_transit()) {
                if (a.v.is_transit() && graph.trip_of(a.v.index) == graph.trip_of(b.v.index))
                    fail(i, "flight along the boarded trip at waypoint " + std::to_string(j));
                if (sigma * (b.t - a.t) + kSlack < d) fail(i, "stop unreachable in time at waypoint " + std::to_string(j));
            } else if (std::abs(b.t - (a.t + d / sigma)) > 1e-6) {
                fail(i, "flight time mismatch at waypoint " + std::to_string(j));
            }
        }
        if (w.back().flown_km > graph.drone().max_flight_km + kSlack) fail(i, "exceeds the flight range");
        for (auto s : boardings(graph, paths[i])) boarded_by[s].insert(paths[i].agent);
        for (auto e : rides(graph, paths[i])) ++load[e];
    }
    for (const auto& [stop, agents] : boarded_by)
        if (agents.size() > 1)
            report.violations.push_back("stop event " + std::to_string(stop) + " boarded by " +
                                        std::to_string(agents.size()) + " agents");
    for (const auto& [edge, n] : load)
        if (n > graph.capacity(edge))
            report.violations.push_back("transit edge " + std::to_string(edge) + " carries " + std::to_string(n) +
                                        " agents, capacity " + std::to_string(graph.capacity(edge)));
    return report;
}

}  // namespace dtn
