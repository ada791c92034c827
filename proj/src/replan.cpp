#include "dtn/replan.hpp"

#include <algorithm>
#include <chrono>

#include "dtn/errors.hpp"

namespace dtn {

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<TaskSpec> tasks_from_path(const DeliveryPath& path, std::size_t num_depots) {
    auto vertex = [&](std::uint32_t v) {
        return v < num_depots ? Vertex::depot(v) : Vertex::package(static_cast<std::uint32_t>(v - num_depots));
    };
    std::vector<TaskSpec> out;
    const auto& v = path.vertices;
    for (std::size_t i = 0; i + 1 < v.size();) {
        if (v[i] >= num_depots) throw InputError("delivery path must alternate from a depot");
        if (v[i + 1] < num_depots) {
            out.push_back({vertex(v[i]), vertex(v[i + 1]), vertex(v[i + 1])});
            i += 1;
        } else {
            if (i + 2 >= v.size() || v[i + 2] >= num_depots) throw InputError("package must be followed by a depot");
            out.push_back({vertex(v[i]), vertex(v[i + 1]), vertex(v[i + 2])});
            i += 2;
        }
    }
    return out;
}

Fleet::Fleet(const OperationGraph& graph, const Heuristics& h, std::vector<std::vector<TaskSpec>> sequences,
             HorizonOptions opt)
    : graph_(graph), h_(h), sequences_(std::move(sequences)), opt_(opt), agents_(sequences_.size()) {}

void Fleet::start() {
    std::vector<AgentTask> tasks;
    for (std::size_t a = 0; a < sequences_.size(); ++a)
        if (!sequences_[a].empty()) tasks.push_back(new_task(a));
    if (tasks.empty()) return;
    const auto t0 = Clock::now();
    auto sol = solve_mapf(graph_, h_, tasks, opt_.ecbs);
    const double took = seconds_since(t0);
    log_.conflicts_resolved += sol.stats.conflicts_resolved;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto a = tasks[i].agent;
        commit(a, sol.paths[i]);
        agents_[a].next_task = 1;
        log_.events.push_back({clock_, a, 0, "initial", took, tasks.size(), sol.stats.conflicts_resolved, sol.paths[i]});
    }
    check();
}

std::optional<std::size_t> Fleet::next_event() const {
    std::optional<std::size_t> best;
    for (std::size_t a = 0; a < agents_.size(); ++a) {
        if (!agents_[a].current) continue;
        if (!best || log_.paths[*agents_[a].current].arrival() < log_.paths[*agents_[*best].current].arrival())
            best = a;
    }
    return best;
}

void Fleet::advance(std::size_t agent) {
    auto& st = agents_.at(agent);
    if (!st.current) throw std::logic_error("agent has no pending path");
    clock_ = std::max(clock_, log_.paths[*st.current].arrival());
    st.history.push_back(*st.current);
    st.current.reset();
    if (st.next_task >= sequences_[agent].size()) {
        log_.events.push_back({clock_, agent, st.next_task, "parked", 0.0, 0, 0, {}});
        return;
    }
    if (opt_.strategy == Strategy::ReplanOne) step_replan_one(agent);
    else step_replan_all(agent);
}

AgentTask Fleet::new_task(std::size_t agent) const {
    const auto& spec = sequences_[agent][agents_[agent].next_task];
    return {agent, spec.origin, spec.package, spec.destination, clock_};
}

AgentTask Fleet::resume_task(std::size_t agent) const {
    const auto& path = log_.paths[*agents_[agent].current];
    const auto& w = path.waypoints;
    std::size_t i = 0;
    while (i + 1 < w.size() && w[i].t < clock_) ++i;
    AgentTask t;
    t.agent = agent;
    t.origin = w[i].v;
    t.package = w[path.delivery_index].v;
    t.destination = w.back().v;
    t.depart = w[i].t;
    t.delivered = i >= path.delivery_index;
    t.leg_km = w[i].flown_km - (t.delivered ? w[path.delivery_index].flown_km : 0.0);
    t.prefix.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    return t;
}

void Fleet::step_replan_one(std::size_t agent) {
    const auto task = new_task(agent);
    const auto t0 = Clock::now();
    try {
        auto sol = solve_mapf(graph_, h_, {task}, opt_.ecbs, committed());
        commit(agent, sol.paths[0]);
        log_.events.push_back({clock_, agent, agents_[agent].next_task, "replan1", seconds_since(t0), 1, 0,
                               sol.paths[0]});
        ++agents_[agent].next_task;
        check();
    } catch (const InfeasibleError&) {
        ++log_.escalations;
        step_replan_all(agent, true);
    }
}

void Fleet::step_replan_all(std::size_t agent, bool escalated) {
    std::vector<AgentTask> tasks{new_task(agent)};
    std::vector<AgentPath> background;
    for (std::size_t b = 0; b < agents_.size(); ++b) {
        if (b == agent) continue;
        const auto& st = agents_[b];
        if (st.current && log_.paths[*st.current].arrival() > clock_) tasks.push_back(resume_task(b));
        else if (st.current) background.push_back(log_.paths[*st.current]);
        for (auto idx : st.history) background.push_back(log_.paths[idx]);
    }
    const auto t0 = Clock::now();
    auto sol = solve_mapf(graph_, h_, tasks, opt_.ecbs, background);
    const double took = seconds_since(t0);
    log_.conflicts_resolved += sol.stats.conflicts_resolved;
    commit(agent, sol.paths[0]);
    for (std::size_t i = 1; i < tasks.size(); ++i) log_.paths[*agents_[tasks[i].agent].current] = sol.paths[i];
    log_.events.push_back({clock_, agent, agents_[agent].next_task, escalated ? "escalated" : "replanm", took,
                           tasks.size(), sol.stats.conflicts_resolved, sol.paths[0]});
    ++agents_[agent].next_task;
    check();
}

void Fleet::commit(std::size_t agent, AgentPath path) {
    path.agent = agent;
    agents_[agent].current = log_.paths.size();
    log_.paths.push_back(std::move(path));
    log_.makespan = makespan();
}

Seconds Fleet::makespan() const {
    Seconds m = 0.0;
    for (const auto& p : log_.paths) m = std::max(m, p.arrival());
    return m;
}

std::vector<AgentPath> Fleet::committed() const { return log_.paths; }

void Fleet::check() {
    log_.makespan = makespan();
    if (!opt_.validate_each_event) return;
    auto report = validate_solution(graph_, log_.paths);
    if (!report.ok()) throw ValidationError("committed paths conflict: " + report.violations.front());
}

ExecutionLog run_horizon(const OperationGraph& graph, const Heuristics& h,
                         const std::vector<std::vector<TaskSpec>>& sequences, const HorizonOptions& opt) {
    Fleet fleet(graph, h, sequences, opt);
    fleet.start();
    while (auto a = fleet.next_event()) fleet.advance(*a);
    return fleet.log();
}

}  // namespace dtn
