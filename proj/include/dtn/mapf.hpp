#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtn/mcsp.hpp"

namespace dtn {

struct Conflict {
    enum class Kind { Boarding, Capacity };
    Kind kind = Kind::Boarding;
    std::uint32_t where = 0;          // boarded stop, or tail stop of the overloaded edge
    Seconds t = 0.0;
    std::vector<std::size_t> agents;  // positions in the path list, ascending
    int capacity = 0;                 // seats left on the edge (capacity conflicts)
    int overflow = 0;                 // agents beyond capacity
};

/// Boarding and capacity conflicts among `paths`, earliest first. Stops boarded and seats
/// taken by `background` paths reduce what is available but are never reported.
std::vector<Conflict> detect_conflicts(const OperationGraph& graph, const std::vector<AgentPath>& paths,
                                       const Occupancy* background = nullptr);

struct EcbsOptions {
    double w = 1.1;
    std::optional<Clock::time_point> deadline;
    bool prune = true;
    /// Resolve capacity conflicts with one child per overloaded agent instead of every
    /// subset; faster but loses the suboptimality bound.
    bool split_single_overflow = false;
};

struct CtNode {
    std::vector<ConstraintSet> constraints;
    std::vector<AgentPath> paths;
    std::vector<Seconds> lower_bounds;
    Seconds cost = 0.0;  // makespan
    Seconds lower_bound = 0.0;
    std::size_t num_conflicts = 0;
    std::size_t id = 0;
};

struct CtChild {
    CtNode node;
    bool feasible = false;
    std::vector<std::size_t> replanned;
};

struct EcbsStats {
    std::size_t nodes_expanded = 0;
    std::size_t nodes_generated = 0;
    std::size_t conflicts_resolved = 0;
    std::size_t low_level_expansions = 0;
    bool bound_certified = true;  // false if a node outside the focal gate had to be returned
};

struct MultiAgentSolution {
    std::vector<AgentPath> paths;
    Seconds makespan = 0.0;
    Seconds lower_bound = 0.0;
    EcbsStats stats;
};

/// Shared state for one ECBS run.
class Ecbs {
public:
    Ecbs(const OperationGraph& graph, const Heuristics& h, std::vector<AgentTask> tasks, EcbsOptions opt = {},
         const std::vector<AgentPath>& background = {});

    /// Root node: each agent planned in turn, seeing the agents planned before it.
    CtNode root();
    /// One child per way of resolving `conflict`; infeasible children are flagged, not dropped.
    std::vector<CtChild> expand(const CtNode& node, const Conflict& conflict);
    MultiAgentSolution solve();

    const std::vector<Conflict> conflicts_of(const CtNode& node) const;
    const EcbsStats& stats() const { return stats_; }

private:
    bool replan(CtNode& node, std::size_t agent);
    void finish(CtNode& node);

    const OperationGraph& graph_;
    const Heuristics& h_;
    std::vector<AgentTask> tasks_;
    EcbsOptions opt_;
    Occupancy background_;
    ConstraintSet base_;
    Seconds t_ref_ = 0.0;
    std::size_t next_id_ = 0;
    EcbsStats stats_;
};

/// Convenience wrapper around Ecbs::solve.
MultiAgentSolution solve_mapf(const OperationGraph& graph, const Heuristics& h, const std::vector<AgentTask>& tasks,
                              const EcbsOptions& opt = {}, const std::vector<AgentPath>& background = {});

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks shared-resource and per-path feasibility. Paths with the same agent id never
/// conflict with each other (they are successive tasks of one drone).
ValidationReport validate_solution(const OperationGraph& graph, const std::vector<AgentPath>& paths);

}  // namespace dtn
