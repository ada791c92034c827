#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "dtn/errors.hpp"
#include "dtn/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInfeasible = 2, kTimeout = 3, kInputError = 4 };

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy;
    std::optional<std::string> surrogate;
};

dtn::ScenarioConfig load(const Common& c) {
    std::ifstream is(c.config);
    if (!is) throw dtn::InputError("cannot open config " + c.config);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw dtn::InputError(c.config + ": " + e.what());
    }
    if (c.seed) j["seed"] = *c.seed;
    if (c.strategy) j["strategy"] = *c.strategy;
    if (c.surrogate) j["surrogate"] = *c.surrogate;
    auto cfg = dtn::parse_config(j, fs::path(c.config).parent_path());
    if (cfg.cache.empty() && cfg.surrogate == dtn::SurrogateMode::Preprocessed) {
        fs::create_directories(c.out);
        cfg.cache = fs::path(c.out) / "surrogate.bin";
    }
    return cfg;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
    app->add_option("--seed", c.seed, "Override the config seed");
    app->add_option("--strategy", c.strategy, "Override the replanning strategy")->check(CLI::IsMember({"replan1", "replanm"}));
    app->add_option("--surrogate", c.surrogate, "Override the surrogate mode")
        ->check(CLI::IsMember({"preprocessed", "direct_flight"}));
}

void report(const dtn::PipelineRun& run) {
    std::printf("depots %zu  packages %zu  agents %zu  trips %zu\n", run.scenario.depots.size(),
                run.scenario.packages.size(), run.config.agents, run.trips.size());
    if (run.allocation)
        std::printf("allocation makespan %.1f s  (alpha %.1f, beta %.1f)\n", run.allocation->bound.makespan,
                    run.allocation->bound.alpha, run.allocation->bound.beta);
    if (run.log)
        std::printf("makespan %.1f s  tasks %zu  conflicts %zu  transit used avg %.2f max %d  range ext avg %.2f max %.2f\n",
                    run.stats.makespan_s, run.stats.tasks, run.stats.conflicts_resolved, run.stats.avg_transit_used,
                    run.stats.max_transit_used, run.stats.avg_range_ext, run.stats.max_range_ext);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-drone delivery over transit networks"};
    app.require_subcommand(1);

    Common common;
    auto* generate = app.add_subcommand("generate", "Write random depot and package locations");
    auto* preprocess = app.add_subcommand("preprocess", "Load the timetable and build the surrogate table");
    auto* allocate = app.add_subcommand("allocate", "Assign delivery sequences to drones");
    auto* route = app.add_subcommand("route", "Plan every drone's first delivery jointly");
    auto* simulate = app.add_subcommand("simulate", "Execute the full sequences with replanning");
    for (auto* s : {generate, preprocess, allocate, route, simulate}) add_common(s, common);

    auto* bench = app.add_subcommand("bench", "Run a config matrix and aggregate statistics");
    std::string matrix, bench_out = "bench.csv";
    bench->add_option("-m,--matrix", matrix, "Bench matrix (JSON)")->required()->check(CLI::ExistingFile);
    bench->add_option("-o,--out", bench_out, "Aggregate CSV")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) {
            std::ifstream is(matrix);
            json j;
            try {
                j = json::parse(is);
            } catch (const json::parse_error& e) {
                throw dtn::InputError(matrix + ": " + e.what());
            }
            const auto spec = dtn::parse_bench(j, fs::path(matrix).parent_path());
            const auto rows = dtn::run_bench(spec);
            std::ofstream os(bench_out, std::ios::binary);
            if (!os) throw dtn::InputError("cannot write " + bench_out);
            os << dtn::bench_csv(rows, spec.compare_strategies);
            for (const auto& r : rows)
                std::printf("%s: %zu/%zu completed, makespan %.1f s, plan median %.3f s\n", r.cell.c_str(), r.completed,
                            r.trials, r.makespan_mean_s, r.plan_time_median_s);
            return kOk;
        }

        dtn::Stage stage = dtn::Stage::Scenario;
        if (preprocess->parsed()) stage = dtn::Stage::Preprocess;
        if (allocate->parsed()) stage = dtn::Stage::Allocate;
        if (route->parsed()) stage = dtn::Stage::Route;
        if (simulate->parsed()) stage = dtn::Stage::Simulate;

        const auto cfg = load(common);
        const auto run = dtn::run_pipeline(cfg, stage);
        dtn::write_outputs(run, common.out);
        report(run);
        return kOk;
    } catch (const dtn::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const dtn::TimeoutError& e) {
        std::cerr << "timeout: " << e.what() << '\n';
        return kTimeout;
    } catch (const dtn::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
