#include "dtn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "dtn/errors.hpp"

namespace dtn {

using nlohmann::json;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Uniform double in [0, 1) that does not depend on the standard library's distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string fmt(double v, int digits = 3) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

const char* strategy_name(Strategy s) { return s == Strategy::ReplanOne ? "replan1" : "replanm"; }
const char* surrogate_name(SurrogateMode s) { return s == SurrogateMode::Preprocessed ? "preprocessed" : "direct_flight"; }

std::string format_hms(std::int64_t t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(t / 3600),
                  static_cast<long long>(t / 60 % 60), static_cast<long long>(t % 60));
    return buf;
}

GeoPoint point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InputError("expected [lat, lon] pair, got " + j.dump());
    GeoPoint p{j[0].get<double>(), j[1].get<double>()};
    if (!p.valid()) throw InputError("coordinate out of range: " + j.dump());
    return p;
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    const std::string tag = std::string(stage) + ": ";
    try {
        return f();
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(tag + e.what(), e.agent());
    } catch (const TimeoutError& e) {
        throw TimeoutError(tag + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(tag + e.what());
    } catch (const InputError& e) {
        throw InputError(tag + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(tag + e.what());
    }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw InputError("cannot write " + file.string());
    os << text;
    if (!os) throw InputError("failed writing " + file.string());
}

json read_json(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw InputError("cannot open " + file.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw InputError(file.string() + ": " + e.what());
    }
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void ScenarioConfig::validate() const {
    if (!bbox.valid()) throw InputError("bbox must have south < north and west < east");
    if (window.end < window.begin) throw InputError("time window ends before it begins");
    if (!drone.valid()) throw InputError("drone speed and range must be positive");
    if (capacity_lo < 1 || capacity_hi < capacity_lo) throw InputError("capacity range must satisfy 1 <= lo <= hi");
    if (!(w >= 1.0)) throw InputError("w must be at least 1");
    if (!(timeout_s > 0.0)) throw InputError("timeout_s must be positive");
    if (packages > 0 && depots == 0) throw InputError("packages need at least one depot");
    if (surrogate == SurrogateMode::Preprocessed && surrogate_sites == 0)
        throw InputError("surrogate_sites must be positive");
}

ScenarioConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    static const std::set<std::string> known{"gtfs",     "bbox",     "window",          "depots",
                                             "packages", "agents",   "seed",            "drone",
                                             "capacity", "w",        "surrogate",       "surrogate_sites",
                                             "surrogate_depart", "strategy", "timeout_s", "scenario",
                                             "cache"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw InputError("unknown config key '" + key + "'");

    ScenarioConfig c;
    try {
        c.gtfs = resolve(j.value("gtfs", std::string{}), base_dir);
        const auto& b = j.at("bbox");
        c.bbox = {{b.at("south").get<double>(), b.at("west").get<double>()},
                  {b.at("north").get<double>(), b.at("east").get<double>()}};
        if (j.contains("window")) {
            const auto& w = j.at("window");
            if (!w.is_array() || w.size() != 2) throw InputError("window must be [\"HH:MM:SS\", \"HH:MM:SS\"]");
            c.window = {parse_gtfs_time(w[0].get<std::string>()), parse_gtfs_time(w[1].get<std::string>())};
        } else {
            c.window = {0, 48 * 3600};
        }
        auto count = [&](const char* key) {
            const auto v = j.value(key, std::int64_t{0});
            if (v < 0) throw InputError(std::string(key) + " must be non-negative");
            return static_cast<std::size_t>(v);
        };
        c.depots = count("depots");
        c.packages = count("packages");
        c.agents = count("agents");
        c.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("drone")) {
            const auto& d = j.at("drone");
            c.drone.speed_kmh = d.value("speed_kmh", c.drone.speed_kmh);
            c.drone.max_flight_km = d.value("max_flight_km", c.drone.max_flight_km);
        }
        if (j.contains("capacity")) {
            const auto& cap = j.at("capacity");
            if (!cap.is_array() || cap.size() != 2) throw InputError("capacity must be [lo, hi]");
            c.capacity_lo = cap[0].get<int>();
            c.capacity_hi = cap[1].get<int>();
        }
        c.w = j.value("w", c.w);
        const auto s = j.value("surrogate", std::string("preprocessed"));
        if (s == "preprocessed") c.surrogate = SurrogateMode::Preprocessed;
        else if (s == "direct_flight") c.surrogate = SurrogateMode::DirectFlight;
        else throw InputError("surrogate must be preprocessed or direct_flight, got '" + s + "'");
        c.surrogate_sites = j.value("surrogate_sites", c.surrogate_sites);
        if (j.contains("surrogate_depart")) c.surrogate_depart = parse_gtfs_time(j.at("surrogate_depart").get<std::string>());
        const auto st = j.value("strategy", std::string("replanm"));
        if (st == "replan1") c.strategy = Strategy::ReplanOne;
        else if (st == "replanm") c.strategy = Strategy::ReplanAll;
        else throw InputError("strategy must be replan1 or replanm, got '" + st + "'");
        c.timeout_s = j.value("timeout_s", c.timeout_s);
        c.scenario = resolve(j.value("scenario", std::string{}), base_dir);
        c.cache = resolve(j.value("cache", std::string{}), base_dir);
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    return parse_config(read_json(file), file.parent_path());
}

json config_to_json(const ScenarioConfig& c) {
    json j{{"bbox", {{"south", c.bbox.min.lat}, {"west", c.bbox.min.lon}, {"north", c.bbox.max.lat}, {"east", c.bbox.max.lon}}},
           {"window", {format_hms(c.window.begin), format_hms(c.window.end)}},
           {"depots", c.depots},
           {"packages", c.packages},
           {"agents", c.agents},
           {"seed", c.seed},
           {"drone", {{"speed_kmh", c.drone.speed_kmh}, {"max_flight_km", c.drone.max_flight_km}}},
           {"capacity", {c.capacity_lo, c.capacity_hi}},
           {"w", c.w},
           {"surrogate", surrogate_name(c.surrogate)},
           {"surrogate_sites", c.surrogate_sites},
           {"strategy", strategy_name(c.strategy)},
           {"timeout_s", c.timeout_s}};
    if (!c.gtfs.empty()) j["gtfs"] = c.gtfs.string();
    if (c.surrogate_depart) j["surrogate_depart"] = format_hms(*c.surrogate_depart);
    if (!c.scenario.empty()) j["scenario"] = c.scenario.string();
    if (!c.cache.empty()) j["cache"] = c.cache.string();
    return j;
}

Scenario generate_scenario(const ScenarioConfig& c) {
    c.validate();
    std::mt19937_64 rng(c.seed);
    auto draw = [&] {
        const double lat = c.bbox.min.lat + unit(rng) * (c.bbox.max.lat - c.bbox.min.lat);
        const double lon = c.bbox.min.lon + unit(rng) * (c.bbox.max.lon - c.bbox.min.lon);
        return GeoPoint{lat, lon};
    };
    Scenario s;
    s.seed = c.seed;
    for (std::size_t i = 0; i < c.depots; ++i) s.depots.push_back(draw());
    for (std::size_t i = 0; i < c.packages; ++i) s.packages.push_back(draw());
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j{{"seed", s.seed}, {"depots", json::array()}, {"packages", json::array()}};
    for (const auto& p : s.depots) j["depots"].push_back({p.lat, p.lon});
    for (const auto& p : s.packages) j["packages"].push_back({p.lat, p.lon});
    return j;
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    try {
        s.seed = j.value("seed", std::uint64_t{0});
        for (const auto& p : j.at("depots")) s.depots.push_back(point_from_json(p));
        for (const auto& p : j.at("packages")) s.packages.push_back(point_from_json(p));
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario: ") + e.what());
    }
    if (!s.packages.empty() && s.depots.empty()) throw InputError("scenario: packages need at least one depot");
    return s;
}

RunStats summarize(const OperationGraph& graph, const ExecutionLog& log) {
    RunStats st;
    st.makespan_s = log.makespan;
    st.conflicts_resolved = log.conflicts_resolved;
    st.escalations = log.escalations;
    double transit = 0.0, ext = 0.0;
    for (const auto& p : log.paths) {
        const int used = static_cast<int>(boardings(graph, p).size());
        const double r = ground_km(graph, p) / graph.drone().max_flight_km;
        transit += used;
        ext += r;
        st.max_transit_used = std::max(st.max_transit_used, used);
        st.max_range_ext = std::max(st.max_range_ext, r);
    }
    st.tasks = log.paths.size();
    if (st.tasks) {
        st.avg_transit_used = transit / static_cast<double>(st.tasks);
        st.avg_range_ext = ext / static_cast<double>(st.tasks);
    }
    return st;
}

PipelineRun run_pipeline(const ScenarioConfig& config, Stage until) {
    config.validate();
    PipelineRun run;
    run.config = config;

    in_stage("scenario", [&] {
        run.scenario = config.scenario.empty() ? generate_scenario(config) : scenario_from_json(read_json(config.scenario));
    });
    if (until == Stage::Scenario) return run;

    in_stage("preprocess", [&] {
        const auto t0 = Clock::now();
        if (!config.gtfs.empty()) run.trips = load_timetable(config.gtfs, config.bbox, config.window);
        run.capacities = OperationGraph::sample_capacities(run.trips, config.capacity_lo, config.capacity_hi, config.seed);
        run.graph = std::make_unique<OperationGraph>(run.trips, run.scenario.depots, run.scenario.packages, config.drone,
                                                     run.capacities);
        run.heuristics = std::make_unique<Heuristics>(*run.graph);
        if (config.surrogate == SurrogateMode::Preprocessed) {
            const auto sites = halton_sites(config.bbox, config.surrogate_sites);
            SurrogateOptions so{config.w, std::nullopt};
            if (config.surrogate_depart) so.depart = *config.surrogate_depart - config.window.begin;
            run.surrogate = config.cache.empty()
                                ? build_surrogate(sites, run.trips, run.capacities, config.drone, so)
                                : cached_surrogate(config.cache, sites, run.trips, run.capacities, config.drone, so);
        }
        run.times.preprocess_s = seconds_since(t0);
    });
    run.reached = Stage::Preprocess;
    if (until == Stage::Preprocess) return run;

    in_stage("allocate", [&] {
        const auto t0 = Clock::now();
        const TravelTimeFn travel = run.surrogate ? surrogate_travel_time(*run.surrogate, config.drone)
                                                  : direct_flight_surrogate(config.drone);
        const auto g = build_allocation_graph(run.scenario.depots, run.scenario.packages, travel, config.drone);
        if (config.agents == 0 && !run.scenario.packages.empty()) throw InputError("packages need at least one agent");
        if (run.scenario.packages.empty() || config.agents == 0) {
            run.allocation = AllocationResult{};
            run.allocation->paths.resize(config.agents);
        } else {
            run.allocation = merge_split_tours(g, config.agents);
        }
        run.sequences.clear();
        for (const auto& p : run.allocation->paths) run.sequences.push_back(tasks_from_path(p, run.scenario.depots.size()));
        run.times.allocate_s = seconds_since(t0);
    });
    run.reached = Stage::Allocate;
    if (until == Stage::Allocate) return run;

    in_stage(until == Stage::Route ? "route" : "simulate", [&] {
        auto sequences = run.sequences;
        if (until == Stage::Route)
            for (auto& s : sequences)
                if (s.size() > 1) s.resize(1);
        HorizonOptions opt;
        opt.strategy = config.strategy;
        opt.ecbs.w = config.w;
        const auto t0 = Clock::now();
        opt.ecbs.deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config.timeout_s));
        run.log = run_horizon(*run.graph, *run.heuristics, sequences, opt);
        run.times.route_s = seconds_since(t0);
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& e : run.log->events) {
            if (e.kind == "parked") continue;
            sum += e.plan_time_s;
            ++n;
            run.times.max_replan_s = std::max(run.times.max_replan_s, e.plan_time_s);
        }
        run.times.mean_replan_s = n ? sum / static_cast<double>(n) : 0.0;
        run.stats = summarize(*run.graph, *run.log);
    });
    run.reached = until;
    return run;
}

json routes_geojson(const OperationGraph& graph, const ExecutionLog& log) {
    json features = json::array();
    auto coord = [&](const Vertex& v) {
        const auto& p = graph.location(v);
        return json::array({p.lon, p.lat});
    };
    for (std::size_t task = 0; task < log.paths.size(); ++task) {
        const auto& path = log.paths[task];
        const auto& w = path.waypoints;
        for (std::size_t i = 0; i + 1 < w.size();) {
            json props{{"agent", path.agent}, {"task", task}};
            json coords = json::array({coord(w[i].v)});
            if (graph.is_ride(w[i].v, w[i + 1].v)) {
                const auto trip = graph.trip_of(w[i].v.index);
                double km = 0.0;
                std::size_t j = i;
                while (j + 1 < w.size() && graph.is_ride(w[j].v, w[j + 1].v)) {
                    km += distance(graph.location(w[j].v), graph.location(w[j + 1].v));
                    coords.push_back(coord(w[j + 1].v));
                    ++j;
                }
                props["leg_kind"] = "ride";
                props["trip_id"] = graph.trips()[trip].trip_id;
                props["t_start"] = w[i].t;
                props["t_end"] = w[j].t;
                props["dist_km"] = km;
                i = j;
            } else {
                const double km = w[i + 1].flown_km - w[i].flown_km;
                coords.push_back(coord(w[i + 1].v));
                props["leg_kind"] = "fly";
                props["t_start"] = w[i].t;
                props["t_end"] = w[i].t + graph.drone().flight_time(km);
                props["dist_km"] = km;
                ++i;
            }
            features.push_back({{"type", "Feature"},
                                {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
                                {"properties", std::move(props)}});
        }
    }
    return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

json allocation_to_json(const AllocationResult& a) {
    json paths = json::array();
    for (std::size_t i = 0; i < a.paths.size(); ++i)
        paths.push_back({{"agent", i}, {"vertices", a.paths[i].vertices}, {"length_s", a.paths[i].length}});
    json merges = json::array();
    for (const auto& [x, y] : a.merges) merges.push_back({x, y});
    return {{"paths", std::move(paths)},
            {"initial_tours", a.initial_tours},
            {"merges", std::move(merges)},
            {"bound", {{"alpha", a.bound.alpha}, {"beta", a.bound.beta}, {"makespan", a.bound.makespan}}}};
}

std::string stats_csv(const PipelineRun& run) {
    const auto& c = run.config;
    const auto& s = run.stats;
    std::ostringstream os;
    os << "depots,packages,agents,seed,surrogate,strategy,w,tasks,makespan_s,avg_transit_used,max_transit_used,"
          "avg_range_ext,max_range_ext,conflicts_resolved,escalations,alloc_makespan_s,alpha_s,beta_s\n";
    const auto& bound = run.allocation ? run.allocation->bound : BoundReport{};
    os << run.scenario.depots.size() << ',' << run.scenario.packages.size() << ',' << c.agents << ',' << c.seed << ','
       << surrogate_name(c.surrogate) << ',' << strategy_name(c.strategy) << ',' << fmt(c.w, 2) << ',' << s.tasks << ','
       << fmt(s.makespan_s) << ',' << fmt(s.avg_transit_used) << ',' << s.max_transit_used << ','
       << fmt(s.avg_range_ext) << ',' << fmt(s.max_range_ext) << ',' << s.conflicts_resolved << ',' << s.escalations
       << ',' << fmt(bound.makespan) << ',' << fmt(bound.alpha) << ',' << fmt(bound.beta) << '\n';
    return os.str();
}

std::string timing_csv(const PipelineRun& run) {
    const auto& t = run.times;
    std::ostringstream os;
    os << "preprocess_s,allocate_s,plan_time_s,mean_replan_s,max_replan_s\n"
       << fmt(t.preprocess_s, 6) << ',' << fmt(t.allocate_s, 6) << ',' << fmt(t.route_s, 6) << ','
       << fmt(t.mean_replan_s, 6) << ',' << fmt(t.max_replan_s, 6) << '\n';
    return os.str();
}

std::string execution_log_jsonl(const OperationGraph& graph, const ExecutionLog& log) {
    std::ostringstream os;
    for (const auto& e : log.events) {
        json j{{"clock", e.clock},
               {"agent", e.agent},
               {"task", e.task_index},
               {"kind", e.kind},
               {"plan_time_s", e.plan_time_s},
               {"replanned_agents", e.replanned_agents},
               {"conflicts_resolved", e.conflicts_resolved}};
        if (!e.path.waypoints.empty()) {
            json trips = json::array();
            for (auto s : boardings(graph, e.path)) trips.push_back(graph.trips()[graph.trip_of(s)].trip_id);
            j["path"] = {{"depart", e.path.depart()},
                         {"arrival", e.path.arrival()},
                         {"flown_km", e.path.flown_km()},
                         {"waypoints", e.path.waypoints.size()},
                         {"boarded_trips", std::move(trips)}};
        }
        os << j.dump() << '\n';
    }
    return os.str();
}

void write_outputs(const PipelineRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "scenario.json", scenario_to_json(run.scenario).dump(2) + "\n");
    if (run.allocation) write_text(dir / "allocation.json", allocation_to_json(*run.allocation).dump(2) + "\n");
    if (run.log) {
        write_text(dir / "routes.geojson", routes_geojson(*run.graph, *run.log).dump(2) + "\n");
        write_text(dir / "stats.csv", stats_csv(run));
        write_text(dir / "timing.csv", timing_csv(run));
        write_text(dir / "execution_log.jsonl", execution_log_jsonl(*run.graph, *run.log));
    }
}

BenchSpec parse_bench(const json& j, const std::filesystem::path& base_dir) {
    BenchSpec b;
    try {
        b.base = j.at("base");
        if (j.contains("cells"))
            for (const auto& c : j.at("cells")) b.cells.push_back(c);
        if (b.cells.empty()) b.cells.push_back(json::object());
        b.trials = j.value("trials", std::size_t{1});
        b.discard_timeouts = j.value("discard_timeouts", true);
        b.compare_strategies = j.value("compare_strategies", false);
        b.workers = std::max<std::size_t>(1, j.value("workers", std::size_t{1}));
        const auto stage = j.value("stage", std::string("simulate"));
        if (stage == "allocate") b.stage = Stage::Allocate;
        else if (stage == "route") b.stage = Stage::Route;
        else if (stage == "simulate") b.stage = Stage::Simulate;
        else throw InputError("bench stage must be allocate, route or simulate");
    } catch (const json::exception& e) {
        throw InputError(std::string("bench: ") + e.what());
    }
    if (b.trials == 0) throw InputError("bench: trials must be positive");
    b.base_dir = base_dir;
    return b;
}

namespace {

struct TrialOutcome {
    enum class Kind { Ok, Timeout, Infeasible, Error } kind = Kind::Ok;
    double alloc_s = 0.0;
    double plan_s = 0.0;
    RunStats stats;
    double makespan_one = 0.0;
    double makespan_all = 0.0;
    std::string error;
};

TrialOutcome run_trial(const BenchSpec& spec, const json& cell, std::size_t trial) {
    TrialOutcome out;
    json merged = spec.base;
    merged.merge_patch(cell);
    merged["seed"] = merged.value("seed", std::uint64_t{0}) + trial;
    try {
        auto cfg = parse_config(merged, spec.base_dir);
        if (spec.compare_strategies) {
            cfg.strategy = Strategy::ReplanOne;
            auto one = run_pipeline(cfg, spec.stage);
            cfg.strategy = Strategy::ReplanAll;
            auto all = run_pipeline(cfg, spec.stage);
            out.makespan_one = one.stats.makespan_s;
            out.makespan_all = all.stats.makespan_s;
            out.alloc_s = all.times.allocate_s;
            out.plan_s = all.times.route_s;
            out.stats = all.stats;
        } else {
            auto run = run_pipeline(cfg, spec.stage);
            out.alloc_s = run.times.allocate_s;
            out.plan_s = run.times.route_s;
            out.stats = run.stats;
        }
    } catch (const TimeoutError& e) {
        out.kind = TrialOutcome::Kind::Timeout;
        out.error = e.what();
        out.plan_s = merged.value("timeout_s", 180.0);
    } catch (const InfeasibleError& e) {
        out.kind = TrialOutcome::Kind::Infeasible;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.kind = TrialOutcome::Kind::Error;
        out.error = e.what();
    }
    return out;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
    const std::size_t total = spec.cells.size() * spec.trials;
    std::vector<TrialOutcome> outcomes(total);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < total;) outcomes[i] = run_trial(spec, spec.cells[i / spec.trials], i % spec.trials);
    };
    const auto workers = std::min(spec.workers, total);
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<BenchRow> rows;
    for (std::size_t c = 0; c < spec.cells.size(); ++c) {
        BenchRow row;
        row.cell = spec.cells[c].dump();
        row.trials = spec.trials;
        std::vector<double> alloc, plan, ext, transit, makespan, conflicts, one, all, delta;
        for (std::size_t t = 0; t < spec.trials; ++t) {
            const auto& o = outcomes[c * spec.trials + t];
            switch (o.kind) {
                case TrialOutcome::Kind::Timeout:
                    ++row.timeouts;
                    if (!spec.discard_timeouts) plan.push_back(o.plan_s);  // censored at the budget
                    break;
                case TrialOutcome::Kind::Infeasible: ++row.infeasible; break;
                case TrialOutcome::Kind::Error: ++row.errors; break;
                case TrialOutcome::Kind::Ok:
                    ++row.completed;
                    alloc.push_back(o.alloc_s);
                    plan.push_back(o.plan_s);
                    ext.push_back(o.stats.avg_range_ext);
                    transit.push_back(o.stats.avg_transit_used);
                    makespan.push_back(o.stats.makespan_s);
                    conflicts.push_back(static_cast<double>(o.stats.conflicts_resolved));
                    row.range_ext_max = std::max(row.range_ext_max, o.stats.max_range_ext);
                    row.transit_used_max = std::max(row.transit_used_max, o.stats.max_transit_used);
                    if (spec.compare_strategies) {
                        one.push_back(o.makespan_one);
                        all.push_back(o.makespan_all);
                        delta.push_back(o.makespan_one - o.makespan_all);
                    }
                    break;
            }
            if (o.kind != TrialOutcome::Kind::Ok && row.first_error.empty()) row.first_error = o.error;
        }
        row.alloc_time_mean_s = mean(alloc);
        row.plan_time_median_s = median(plan);
        row.plan_time_mean_s = mean(plan);
        row.range_ext_avg = mean(ext);
        row.transit_used_avg = mean(transit);
        row.makespan_mean_s = mean(makespan);
        row.conflicts_mean = mean(conflicts);
        row.makespan_replan1_mean_s = mean(one);
        row.makespan_replanm_mean_s = mean(all);
        row.makespan_delta_mean_s = mean(delta);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool compare_strategies) {
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch == '\n' ? ' ' : ch);
        return q + "\"";
    };
    std::ostringstream os;
    os << "cell,trials,completed,timeouts,infeasible,errors,alloc_time_mean_s,plan_time_median_s,plan_time_mean_s,"
          "range_ext_avg,range_ext_max,transit_used_avg,transit_used_max,makespan_mean_s,conflicts_mean";
    if (compare_strategies) os << ",makespan_replan1_mean_s,makespan_replanm_mean_s,makespan_delta_mean_s";
    os << ",first_error\n";
    for (const auto& r : rows) {
        os << quote(r.cell) << ',' << r.trials << ',' << r.completed << ',' << r.timeouts << ',' << r.infeasible << ','
           << r.errors << ',' << fmt(r.alloc_time_mean_s, 6) << ',' << fmt(r.plan_time_median_s, 6) << ','
           << fmt(r.plan_time_mean_s, 6) << ',' << fmt(r.range_ext_avg) << ',' << fmt(r.range_ext_max) << ','
           << fmt(r.transit_used_avg) << ',' << r.transit_used_max << ',' << fmt(r.makespan_mean_s) << ','
           << fmt(r.conflicts_mean);
        if (compare_strategies)
            os << ',' << fmt(r.makespan_replan1_mean_s) << ',' << fmt(r.makespan_replanm_mean_s) << ','
               << fmt(r.makespan_delta_mean_s);
        os << ',' << quote(r.first_error) << '\n';
    }
    return os.str();
}

}  // namespace dtn
