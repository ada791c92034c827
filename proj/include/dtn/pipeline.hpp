#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dtn/allocation.hpp"
#include "dtn/replan.hpp"
#include "dtn/surrogate.hpp"
#include "dtn/transit.hpp"

namespace dtn {

enum class SurrogateMode { Preprocessed, DirectFlight };

struct ScenarioConfig {
    std::filesystem::path gtfs;      // empty: no transit at all
    BoundingBox bbox;
    TimeWindow window;
    std::size_t depots = 0;
    std::size_t packages = 0;
    std::size_t agents = 0;
    std::uint64_t seed = 0;
    DroneSpec drone;
    int capacity_lo = 3;
    int capacity_hi = 5;
    double w = 1.1;
    SurrogateMode surrogate = SurrogateMode::Preprocessed;
    std::size_t surrogate_sites = 100;
    std::optional<std::int64_t> surrogate_depart;  // relative to the window start
    Strategy strategy = Strategy::ReplanAll;
    double timeout_s = 180.0;
    std::filesystem::path scenario;  // load locations from here instead of generating them
    std::filesystem::path cache;     // surrogate cache file; empty disables caching

    /// Throws InputError on counts, ranges or weights that make no sense.
    void validate() const;
};

/// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
ScenarioConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& file);
nlohmann::json config_to_json(const ScenarioConfig& c);

struct Scenario {
    std::uint64_t seed = 0;
    std::vector<GeoPoint> depots;
    std::vector<GeoPoint> packages;
};

/// Depots and packages drawn uniformly in the bounding box from the config seed.
Scenario generate_scenario(const ScenarioConfig& c);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

struct RunStats {
    std::size_t tasks = 0;
    double makespan_s = 0.0;
    double avg_transit_used = 0.0;
    int max_transit_used = 0;
    double avg_range_ext = 0.0;
    double max_range_ext = 0.0;
    std::size_t conflicts_resolved = 0;
    std::size_t escalations = 0;
};

/// Transit used counts boardings per task path; range extension is ground distance over the
/// flight range, also per task path. Reposition hops count as tasks.
RunStats summarize(const OperationGraph& graph, const ExecutionLog& log);

struct StageTimes {
    double preprocess_s = 0.0;
    double allocate_s = 0.0;
    double route_s = 0.0;
    double mean_replan_s = 0.0;
    double max_replan_s = 0.0;
};

enum class Stage { Scenario, Preprocess, Allocate, Route, Simulate };

/// Everything one pipeline run produces. `Route` plans only every agent's first task jointly;
/// `Simulate` executes the full sequences with the configured replanning strategy.
struct PipelineRun {
    ScenarioConfig config;
    Stage reached = Stage::Scenario;
    Scenario scenario;
    std::vector<TransitTrip> trips;
    std::vector<int> capacities;
    std::unique_ptr<OperationGraph> graph;
    std::unique_ptr<Heuristics> heuristics;
    std::optional<SurrogateTable> surrogate;
    std::optional<AllocationResult> allocation;
    std::vector<std::vector<TaskSpec>> sequences;
    std::optional<ExecutionLog> log;
    RunStats stats;
    StageTimes times;
};

/// Runs stages up to and including `until`. Errors keep their type and get the stage name
/// prefixed to the message.
PipelineRun run_pipeline(const ScenarioConfig& config, Stage until);

/// GeoJSON FeatureCollection with one LineString per flight or ride leg.
nlohmann::json routes_geojson(const OperationGraph& graph, const ExecutionLog& log);
nlohmann::json allocation_to_json(const AllocationResult& a);
std::string stats_csv(const PipelineRun& run);
std::string timing_csv(const PipelineRun& run);
/// One JSON object per replanning event, newline separated.
std::string execution_log_jsonl(const OperationGraph& graph, const ExecutionLog& log);

/// Writes whatever `run` has reached into `dir`: scenario.json, allocation.json,
/// routes.geojson, stats.csv, timing.csv, execution_log.jsonl.
void write_outputs(const PipelineRun& run, const std::filesystem::path& dir);

/// Benchmark matrix: a base config, a list of override cells and a trial count. Each trial
/// shifts the seed by its index.
struct BenchSpec {
    nlohmann::json base;
    std::vector<nlohmann::json> cells;
    std::size_t trials = 1;
    bool discard_timeouts = true;
    bool compare_strategies = false;  // run Replan-1 and Replan-m on every trial
    Stage stage = Stage::Simulate;
    std::size_t workers = 1;
    std::filesystem::path base_dir;
};

BenchSpec parse_bench(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct BenchRow {
    std::string cell;
    std::size_t trials = 0;
    std::size_t completed = 0;
    std::size_t timeouts = 0;
    std::size_t infeasible = 0;
    std::size_t errors = 0;
    double alloc_time_mean_s = 0.0;
    double plan_time_median_s = 0.0;
    double plan_time_mean_s = 0.0;
    double range_ext_avg = 0.0;
    double range_ext_max = 0.0;
    double transit_used_avg = 0.0;
    int transit_used_max = 0;
    double makespan_mean_s = 0.0;
    double conflicts_mean = 0.0;
    // filled when strategies are compared
    double makespan_replan1_mean_s = 0.0;
    double makespan_replanm_mean_s = 0.0;
    double makespan_delta_mean_s = 0.0;
    std::string first_error;
};

std::vector<BenchRow> run_bench(const BenchSpec& spec);
std::string bench_csv(const std::vector<BenchRow>& rows, bool compare_strategies);

}  // namespace dtn
