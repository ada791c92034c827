#include "dtn/mcsp.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#include "dtn/errors.hpp"

namespace dtn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-9;

struct Label {
    Vertex v;
    Seconds t;
    double km;
    int conflicts;
    double f;
    std::uint32_t parent;
};

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

class FocalSearch {
public:
    FocalSearch(const OperationGraph& graph, const Heuristics& h, const Vertex& goal, Seconds depart,
                const SearchOptions& opt)
        : graph_(graph), h_(h), goal_(goal), depart_(depart), opt_(opt) {}

    SearchResult run(const Vertex& start) {
        SearchResult out;
        push({start, depart_, 0.0, 0, depart_ + h_.time(start, goal_), kNoParent});
        refresh_focal();
        while (!focal_.empty()) {
            if (opt_.deadline && (out.expansions & 127) == 0 && Clock::now() > *opt_.deadline) {
                out.status = SearchStatus::Timeout;
                out.lower_bound = open_.begin()->first;
                return out;
            }
            const Seconds f_min = open_.begin()->first;
            const auto id = std::get<3>(*focal_.begin());
            erase_open(id);
            const Label cur = labels_[id];
            if (cur.v == goal_) {
                out.status = SearchStatus::Found;
                out.lower_bound = f_min;
                out.conflicts = cur.conflicts;
                for (auto i = id; i != kNoParent; i = labels_[i].parent)
                    out.waypoints.push_back({labels_[i].v, labels_[i].t, labels_[i].km});
                std::reverse(out.waypoints.begin(), out.waypoints.end());
                return out;
            }
            ++out.expansions;
            expand(cur, id);
            refresh_focal();
        }
        out.status = SearchStatus::Infeasible;
        out.lower_bound = kInf;
        return out;
    }

private:
    using FocalKey = std::tuple<int, double, std::uint64_t, std::uint32_t>;

    FocalKey focal_key(std::uint32_t id) const {
        const auto& l = labels_[id];
        return {l.conflicts, l.f, l.v.key(), id};
    }

    void expand(const Label& cur, std::uint32_t id) {
        NeighborQuery q{cur.v, cur.t, opt_.limit_km - cur.km, goal_, opt_.constraints, opt_.prune};
        for (const auto& e : graph_.out_neighbors(q)) {
            const double km = cur.km + e.energy_km;
            if (km > opt_.limit_km + kSlack) continue;
            const double h_km = h_.dist(e.v, goal_);
            if (km + h_km > opt_.limit_km + kSlack) continue;
            const Seconds t = e.v.is_transit() ? graph_.stop_time(e.v.index) : cur.t + e.traversal;
            int conflicts = cur.conflicts;
            if (opt_.others && e.v.is_transit()) {
                if (e.ride) {
                    if (opt_.others->riders_on(cur.v.index) + 1 > e.capacity) ++conflicts;
                } else {
                    conflicts += opt_.others->boarders_at(e.v.index);
                }
            }
            push({e.v, t, km, conflicts, t + h_.time(e.v, goal_), id});
        }
    }

    /// Adds a label unless an existing label at its vertex is at least as early and as light;
    /// labels it dominates are dropped.
    void push(const Label& l) {
        auto& front = frontier_[l.v.key()];
        for (auto other : front) {
            const auto& o = labels_[other];
            if (o.t <= l.t && o.km <= l.km) return;
        }
        const auto id = static_cast<std::uint32_t>(labels_.size());
        labels_.push_back(l);
        std::erase_if(front, [&](std::uint32_t other) {
            const auto& o = labels_[other];
            if (l.t <= o.t && l.km <= o.km) {
                erase_open(other);
                return true;
            }
            return false;
        });
        front.push_back(id);
        open_.insert({l.f, id});
        if (l.f <= bound_) focal_.insert(focal_key(id));
    }

    void erase_open(std::uint32_t id) {
        if (open_.erase({labels_[id].f, id})) focal_.erase(focal_key(id));
    }

    void refresh_focal() {
        if (open_.empty()) return;
        const double f_min = open_.begin()->first;
        const double bound = depart_ + opt_.w * (f_min - depart_) + kSlack;
        if (bound > bound_) {
            for (auto it = open_.upper_bound({bound_, kNoParent}); it != open_.end() && it->first <= bound; ++it)
                focal_.insert(focal_key(it->second));
        } else if (bound < bound_) {
            for (auto it = open_.upper_bound({bound, kNoParent}); it != open_.end() && it->first <= bound_; ++it)
                focal_.erase(focal_key(it->second));
        }
        bound_ = bound;
    }

    const OperationGraph& graph_;
    const Heuristics& h_;
    Vertex goal_;
    Seconds depart_;
    const SearchOptions& opt_;
    std::vector<Label> labels_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> frontier_;
    std::set<std::pair<double, std::uint32_t>> open_;
    std::set<FocalKey> focal_;
    double bound_ = -kInf;
};

}  // namespace

bool is_boarding(const OperationGraph& graph, const std::vector<Waypoint>& w, std::size_t i) {
    if (!w[i].v.is_transit()) return false;
    return i == 0 || !graph.is_ride(w[i - 1].v, w[i].v);
}

std::vector<std::uint32_t> boardings(const OperationGraph& graph, const AgentPath& path) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < path.waypoints.size(); ++i)
        if (is_boarding(graph, path.waypoints, i)) out.push_back(path.waypoints[i].v.index);
    return out;
}

std::vector<std::uint32_t> rides(const OperationGraph& graph, const AgentPath& path) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i)
        if (graph.is_ride(path.waypoints[i - 1].v, path.waypoints[i].v)) out.push_back(path.waypoints[i - 1].v.index);
    return out;
}

double ground_km(const OperationGraph& graph, const AgentPath& path) {
    double km = 0.0;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i)
        km += distance(graph.location(path.waypoints[i - 1].v), graph.location(path.waypoints[i].v));
    return km;
}

void Occupancy::add(const OperationGraph& graph, const AgentPath& path) {
    for (auto s : boardings(graph, path)) ++boarders[s];
    for (auto e : rides(graph, path)) ++riders[e];
}

int Occupancy::boarders_at(std::uint32_t stop) const {
    auto it = boarders.find(stop);
    return it == boarders.end() ? 0 : it->second;
}

int Occupancy::riders_on(std::uint32_t edge_tail) const {
    auto it = riders.find(edge_tail);
    return it == riders.end() ? 0 : it->second;
}

SearchResult focal_mcsp(const OperationGraph& graph, const Heuristics& h, const Vertex& start, const Vertex& goal,
                        Seconds depart, const SearchOptions& opt) {
    if (opt.w < 1.0) throw InputError("suboptimality factor must be at least 1");
    if (!graph.contains(start) || !graph.contains(goal)) throw InputError("search endpoint not in graph");
    if (start == goal) {
        SearchResult out;
        out.status = SearchStatus::Found;
        out.waypoints.push_back({start, depart, 0.0});
        out.lower_bound = depart;
        return out;
    }
    if (opt.limit_km < 0.0) return {};
    FocalSearch search(graph, h, goal, depart, opt);
    return search.run(start);
}

namespace {

bool prefix_allowed(const OperationGraph& graph, const std::vector<Waypoint>& w, const ConstraintSet* cons) {
    if (!cons) return true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (is_boarding(graph, w, i) && !cons->may_board(w[i].v.index)) return false;
        if (i > 0 && graph.is_ride(w[i - 1].v, w[i].v) && !cons->may_ride(w[i - 1].v.index)) return false;
    }
    return true;
}

void append_leg(std::vector<Waypoint>& out, const std::vector<Waypoint>& leg) {
    const double base = out.back().flown_km;
    for (std::size_t i = 1; i < leg.size(); ++i) out.push_back({leg[i].v, leg[i].t, base + leg[i].flown_km});
}

}  // namespace

TaskPlan plan_task(const OperationGraph& graph, const Heuristics& h, const AgentTask& task, const PlanOptions& opt) {
    TaskPlan out;
    out.path.agent = task.agent;
    auto& w = out.path.waypoints;
    w = task.prefix;
    if (w.empty()) w.push_back({task.origin, task.depart, 0.0});
    if (!(w.back().v == task.origin)) throw InputError("task prefix must end at its origin");
    if (!prefix_allowed(graph, w, opt.constraints)) {
        out.failed_leg = task.delivered ? 2 : 1;
        out.reason = "committed prefix violates constraints";
        return out;
    }
    const double half = graph.drone().max_flight_km / 2.0;
    SearchOptions so{opt.w, 0.0, opt.constraints, opt.others, opt.deadline, opt.prune};

    auto fail = [&](const SearchResult& r, int leg) {
        out.status = r.status;
        out.failed_leg = leg;
        out.expansions += r.expansions;
        out.reason = r.status == SearchStatus::Timeout ? "search timed out" : "no feasible path within half range";
        return out;
    };

    Seconds leg1_bound = task.depart;
    Seconds leg2_depart = task.depart;
    Vertex leg2_start = task.origin;
    double leg2_used = task.leg_km;
    if (!task.delivered) {
        // A depot standing in for the package is a reposition hop: one leg with the full range.
        const bool reposition = task.package.kind == VertexKind::Depot;
        so.limit_km = (reposition ? graph.drone().max_flight_km : half) - task.leg_km;
        auto leg1 = focal_mcsp(graph, h, task.origin, task.package, task.depart, so);
        if (leg1.status != SearchStatus::Found) return fail(leg1, 1);
        out.expansions += leg1.expansions;
        append_leg(w, leg1.waypoints);
        out.path.delivery_index = w.size() - 1;
        leg1_bound = leg1.lower_bound;
        leg2_depart = leg1.arrival();
        leg2_start = task.package;
        leg2_used = 0.0;
    } else {
        const auto it = std::find_if(w.begin(), w.end(), [&](const Waypoint& x) { return x.v == task.package; });
        if (it == w.end()) throw InputError("delivered task prefix does not visit its package");
        out.path.delivery_index = static_cast<std::size_t>(it - w.begin());
    }

    so.limit_km = half - leg2_used;
    auto leg2 = focal_mcsp(graph, h, leg2_start, task.destination, leg2_depart, so);
    if (leg2.status != SearchStatus::Found) return fail(leg2, 2);
    out.expansions += leg2.expansions;
    append_leg(w, leg2.waypoints);
    out.status = SearchStatus::Found;
    out.lower_bound = leg2.lower_bound;

    // Leg 2's bound holds only for its actual start; if leg 1 arrived later than its own
    // bound, an optimal leg 2 from that bound gives a valid bound for the whole task.
    if (!task.delivered && leg2_depart > leg1_bound + kSlack) {
        SearchOptions exact = so;
        exact.w = 1.0;
        exact.others = nullptr;
        auto probe = focal_mcsp(graph, h, task.package, task.destination, leg1_bound, exact);
        out.expansions += probe.expansions;
        out.lower_bound = probe.status == SearchStatus::Found ? probe.arrival() : probe.lower_bound;
        if (probe.status == SearchStatus::Timeout) {
            out.status = SearchStatus::Timeout;
            out.reason = "search timed out";
        }
        out.lower_bound = std::min(out.lower_bound, out.path.arrival());
    }
    return out;
}

}  // namespace dtn
