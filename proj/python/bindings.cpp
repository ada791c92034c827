#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtn/allocation.hpp"
#include "dtn/errors.hpp"
#include "dtn/heuristics.hpp"
#include "dtn/pipeline.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

dtn::GeoPoint point(const std::pair<double, double>& p) { return {p.first, p.second}; }

dtn::Stage stage_from(const std::string& s) {
    if (s == "scenario") return dtn::Stage::Scenario;
    if (s == "preprocess") return dtn::Stage::Preprocess;
    if (s == "allocate") return dtn::Stage::Allocate;
    if (s == "route") return dtn::Stage::Route;
    if (s == "simulate") return dtn::Stage::Simulate;
    throw dtn::InputError("unknown stage '" + s + "'");
}

dtn::AllocationGraph graph_from(std::size_t depots, std::size_t packages, const std::vector<std::vector<double>>& costs) {
    const auto n = depots + packages;
    if (costs.size() != n) throw dtn::InputError("cost matrix must have depots + packages rows");
    std::vector<double> flat;
    for (const auto& row : costs) {
        if (row.size() != n) throw dtn::InputError("cost matrix must be square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return dtn::AllocationGraph::from_costs(depots, packages, flat);
}

py::dict run_dict(const dtn::PipelineRun& run) {
    py::dict d;
    d["scenario"] = scenario_to_json(run.scenario).dump();
    if (run.allocation) d["allocation"] = allocation_to_json(*run.allocation).dump();
    if (run.log) {
        d["routes"] = routes_geojson(*run.graph, *run.log).dump();
        d["stats_csv"] = stats_csv(run);
        d["timing_csv"] = timing_csv(run);
        d["log"] = execution_log_jsonl(*run.graph, *run.log);
        const auto& s = run.stats;
        py::dict st;
        st["tasks"] = s.tasks;
        st["makespan_s"] = s.makespan_s;
        st["avg_transit_used"] = s.avg_transit_used;
        st["max_transit_used"] = s.max_transit_used;
        st["avg_range_ext"] = s.avg_range_ext;
        st["max_range_ext"] = s.max_range_ext;
        st["conflicts_resolved"] = s.conflicts_resolved;
        st["escalations"] = s.escalations;
        d["stats"] = st;
    }
    d["trips"] = run.trips.size();
    return d;
}

}  // namespace

PYBIND11_MODULE(_dtn, m) {
    m.doc() = "Multi-drone delivery over transit networks";

    auto base = py::register_exception<dtn::Error>(m, "Error");
    py::register_exception<dtn::InputError>(m, "InputError", base);
    py::register_exception<dtn::InfeasibleError>(m, "InfeasibleError", base);
    py::register_exception<dtn::ValidationError>(m, "ValidationError", base);
    py::register_exception<dtn::TimeoutError>(m, "SearchTimeout", base);

    m.def("distance", [](std::pair<double, double> a, std::pair<double, double> b) { return dtn::distance(point(a), point(b)); },
          py::arg("a"), py::arg("b"), "Great-circle distance in km between (lat, lon) pairs.");

    m.def(
        "halton_sites",
        [](std::pair<double, double> south_west, std::pair<double, double> north_east, std::size_t n) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : dtn::halton_sites({point(south_west), point(north_east)}, n)) out.emplace_back(p.lat, p.lon);
            return out;
        },
        py::arg("south_west"), py::arg("north_east"), py::arg("n"));

    m.def(
        "solve_mct",
        [](std::size_t depots, std::size_t packages, const std::vector<std::vector<double>>& costs) {
            const auto sol = dtn::solve_mct(graph_from(depots, packages, costs));
            std::vector<std::vector<int>> x(sol.n, std::vector<int>(sol.n));
            for (std::size_t u = 0; u < sol.n; ++u)
                for (std::size_t v = 0; v < sol.n; ++v) x[u][v] = sol.at(u, v);
            return py::make_tuple(x, sol.objective);
        },
        py::arg("depots"), py::arg("packages"), py::arg("costs"),
        "Minimal connecting tours; returns (edge multiplicities, objective).");

    m.def(
        "merge_split_tours",
        [](std::size_t depots, std::size_t packages, const std::vector<std::vector<double>>& costs, std::size_t agents) {
            const auto r = dtn::merge_split_tours(graph_from(depots, packages, costs), agents);
            py::dict d;
            std::vector<std::vector<std::uint32_t>> paths;
            std::vector<double> lengths;
            for (const auto& p : r.paths) paths.push_back(p.vertices), lengths.push_back(p.length);
            d["paths"] = paths;
            d["lengths"] = lengths;
            d["makespan"] = r.bound.makespan;
            d["alpha"] = r.bound.alpha;
            d["beta"] = r.bound.beta;
            return d;
        },
        py::arg("depots"), py::arg("packages"), py::arg("costs"), py::arg("agents"));

    m.def(
        "run_pipeline",
        [](const std::string& config_json, const std::string& stage, const std::string& base_dir) {
            const auto cfg = dtn::parse_config(json::parse(config_json), base_dir);
            dtn::PipelineRun run;
            {
                py::gil_scoped_release release;
                run = dtn::run_pipeline(cfg, stage_from(stage));
            }
            return run_dict(run);
        },
        py::arg("config_json"), py::arg("stage") = "simulate", py::arg("base_dir") = "");

    m.def(
        "bench",
        [](const std::string& spec_json, const std::string& base_dir) {
            const auto spec = dtn::parse_bench(json::parse(spec_json), base_dir);
            std::vector<dtn::BenchRow> rows;
            {
                py::gil_scoped_release release;
                rows = dtn::run_bench(spec);
            }
            return dtn::bench_csv(rows, spec.compare_strategies);
        },
        py::arg("spec_json"), py::arg("base_dir") = "");
}
