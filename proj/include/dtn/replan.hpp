#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtn/allocation.hpp"
#include "dtn/mapf.hpp"

namespace dtn {

/// One delivery (or a depot-to-depot reposition when `package` is a depot).
struct TaskSpec {
    Vertex origin;
    Vertex package;
    Vertex destination;
    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Turns an allocation path d p d' [d'' p' d''' ...] into tasks. A depot followed by another
/// depot becomes a reposition task to the second one.
std::vector<TaskSpec> tasks_from_path(const DeliveryPath& path, std::size_t num_depots);

enum class Strategy { ReplanOne, ReplanAll };

struct HorizonOptions {
    Strategy strategy = Strategy::ReplanAll;
    EcbsOptions ecbs;
    bool validate_each_event = true;
};

struct ReplanEvent {
    Seconds clock = 0.0;
    std::size_t agent = 0;
    std::size_t task_index = 0;
    std::string kind;  // initial | replan1 | replanm | escalated | parked
    double plan_time_s = 0.0;
    std::size_t replanned_agents = 0;
    std::size_t conflicts_resolved = 0;
    AgentPath path;     // the agent's new committed path (empty when parked)
};

struct ExecutionLog {
    std::vector<ReplanEvent> events;
    std::vector<AgentPath> paths;  // every committed path in commit order, final versions
    Seconds makespan = 0.0;
    std::size_t conflicts_resolved = 0;
    std::size_t escalations = 0;
};

/// Fleet executing per-agent task sequences, replanning whenever a drone finishes a task.
class Fleet {
public:
    Fleet(const OperationGraph& graph, const Heuristics& h, std::vector<std::vector<TaskSpec>> sequences,
          HorizonOptions opt = {});

    /// Plans every agent's first task jointly.
    void start();
    /// Agent whose committed path ends first (ties by lowest index), if any remain.
    std::optional<std::size_t> next_event() const;
    /// Handles the completion of `agent`'s current path with the configured strategy.
    void advance(std::size_t agent);
    /// Plans only `agent`'s next task around everyone else's commitments. Escalates to
    /// step_replan_all when that is infeasible.
    void step_replan_one(std::size_t agent);
    /// Replans `agent`'s next task together with every drone still en route.
    void step_replan_all(std::size_t agent, bool escalated = false);

    Seconds clock() const { return clock_; }
    Seconds makespan() const;
    const ExecutionLog& log() const { return log_; }
    /// All committed paths (past and current).
    std::vector<AgentPath> committed() const;

private:
    struct AgentState {
        std::vector<std::size_t> history;        // indices into log_.paths
        std::optional<std::size_t> current;      // index into log_.paths, pending completion
        std::size_t next_task = 0;
    };

    AgentTask new_task(std::size_t agent) const;
    AgentTask resume_task(std::size_t agent) const;
    void commit(std::size_t agent, AgentPath path);
    void check();

    const OperationGraph& graph_;
    const Heuristics& h_;
    std::vector<std::vector<TaskSpec>> sequences_;
    HorizonOptions opt_;
    std::vector<AgentState> agents_;
    Seconds clock_ = 0.0;
    ExecutionLog log_;
};

ExecutionLog run_horizon(const OperationGraph& graph, const Heuristics& h,
                         const std::vector<std::vector<TaskSpec>>& sequences, const HorizonOptions& opt = {});

}  // namespace dtn
