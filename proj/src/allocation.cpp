#include "dtn/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "dtn/errors.hpp"

namespace dtn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Residual network for successive shortest paths with Dijkstra on reduced costs.
class MinCostFlow {
public:
    explicit MinCostFlow(std::size_t n) : adj_(n) {}

    std::size_t add_edge(std::size_t u, std::size_t v, int cap, double cost) {
        const std::size_t id = edges_.size();
        edges_.push_back({v, cap, cost});
        adj_[u].push_back(id);
        edges_.push_back({u, 0, -cost});
        adj_[v].push_back(id + 1);
        return id;
    }

    int flow_on(std::size_t id) const { return edges_[id ^ 1].cap; }

    /// Pushes up to `want` units from s to t along cheapest paths; returns units pushed.
    /// All initial costs must be non-negative.
    int run(std::size_t s, std::size_t t, int want) {
        const std::size_t n = adj_.size();
        std::vector<double> potential(n, 0.0), dist(n);
        std::vector<std::size_t> via(n);
        int pushed = 0;
        while (pushed < want) {
            std::fill(dist.begin(), dist.end(), kInf);
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            dist[s] = 0.0;
            pq.emplace(0.0, s);
            while (!pq.empty()) {
                auto [d, u] = pq.top();
                pq.pop();
                if (d > dist[u]) continue;
                for (auto id : adj_[u]) {
                    const auto& e = edges_[id];
                    if (e.cap <= 0) continue;
                    // Reduced costs are non-negative up to rounding.
                    const double rc = std::max(0.0, e.cost + potential[u] - potential[e.to]);
                    if (d + rc < dist[e.to]) {
                        dist[e.to] = d + rc;
                        via[e.to] = id;
                        pq.emplace(dist[e.to], e.to);
                    }
                }
            }
            if (dist[t] == kInf) break;
            for (std::size_t v = 0; v < n; ++v)
                if (dist[v] < kInf) potential[v] += dist[v];
            int aug = want - pushed;
            for (std::size_t v = t; v != s; v = edges_[via[v] ^ 1].to) aug = std::min(aug, edges_[via[v]].cap);
            for (std::size_t v = t; v != s; v = edges_[via[v] ^ 1].to) {
                edges_[via[v]].cap -= aug;
                edges_[via[v] ^ 1].cap += aug;
            }
            pushed += aug;
        }
        return pushed;
    }

private:
    struct Edge {
        std::size_t to;
        int cap;
        double cost;
    };
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adj_;
};

std::string package_name(const AllocationGraph& g, std::size_t v) {
    return "package " + std::to_string(v - g.num_depots());
}

}  // namespace

TravelTimeFn direct_flight_surrogate(const DroneSpec& drone) {
    return [drone](const GeoPoint& a, const GeoPoint& b) {
        const double d = distance(a, b);
        return d <= drone.max_flight_km / 2.0 ? drone.flight_time(d) : kInf;
    };
}

AllocationGraph::AllocationGraph(std::size_t num_depots, std::size_t num_packages)
    : depots_(num_depots),
      packages_(num_packages),
      cost_(size() * size(), kInf),
      present_(size() * size(), 0) {}

AllocationGraph AllocationGraph::from_costs(std::size_t num_depots, std::size_t num_packages,
                                            const std::vector<double>& costs) {
    AllocationGraph g(num_depots, num_packages);
    const std::size_t n = g.size();
    if (costs.size() != n * n) throw InputError("cost matrix must be (depots+packages)^2");
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v || (!g.is_depot(u) && !g.is_depot(v))) continue;
            const double c = costs[u * n + v];
            if (std::isfinite(c)) g.set_edge(u, v, c);
        }
    return g;
}

void AllocationGraph::set_edge(std::size_t u, std::size_t v, double c) {
    if (u == v) throw InputError("self loops are not allowed in the allocation graph");
    if (!is_depot(u) && !is_depot(v)) throw InputError("package-to-package edges are not allowed");
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("edge cost must be finite and non-negative");
    cost_[u * size() + v] = c;
    present_[u * size() + v] = 1;
}

std::size_t AllocationGraph::num_edges() const {
    return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), char{1}));
}

void AllocationGraph::check_preconditions() const {
    if (depots_ == 0) throw InfeasibleError("allocation needs at least one depot");
    for (std::size_t d = 0; d < depots_; ++d)
        for (std::size_t e = 0; e < depots_; ++e)
            if (d != e && !has_edge(d, e))
                throw InfeasibleError("depot subgraph is not complete: missing " + std::to_string(d) + "->" +
                                      std::to_string(e));
    for (std::size_t p = depots_; p < size(); ++p) {
        bool in = false, out = false;
        for (std::size_t d = 0; d < depots_; ++d) {
            in = in || has_edge(d, p);
            out = out || has_edge(p, d);
        }
        if (!in) throw InfeasibleError(package_name(*this, p) + " is not reachable from any depot");
        if (!out) throw InfeasibleError(package_name(*this, p) + " cannot return to any depot");
    }
}

AllocationGraph build_allocation_graph(const std::vector<GeoPoint>& depots, const std::vector<GeoPoint>& packages,
                                       const TravelTimeFn& travel_time, const DroneSpec& drone) {
    if (depots.empty()) throw InputError("at least one depot is required");
    AllocationGraph g(depots.size(), packages.size());
    for (std::size_t d = 0; d < depots.size(); ++d) {
        for (std::size_t e = 0; e < depots.size(); ++e) {
            if (d == e) continue;
            double c = travel_time(depots[d], depots[e]);
            if (!std::isfinite(c)) c = drone.flight_time(distance(depots[d], depots[e]));
            g.set_edge(d, e, c);
        }
        for (std::size_t j = 0; j < packages.size(); ++j) {
            const auto p = g.package_vertex(j);
            if (const double c = travel_time(depots[d], packages[j]); std::isfinite(c)) g.set_edge(d, p, c);
            if (const double c = travel_time(packages[j], depots[d]); std::isfinite(c)) g.set_edge(p, d, c);
        }
    }
    for (std::size_t j = 0; j < packages.size(); ++j) {
        bool reachable = false;
        for (std::size_t d = 0; d < depots.size(); ++d)
            reachable = reachable || g.has_edge(d, g.package_vertex(j)) || g.has_edge(g.package_vertex(j), d);
        if (!reachable) throw InfeasibleError("package " + std::to_string(j) + " is not reachable from any depot");
    }
    return g;
}

MCTSolution solve_mct(const AllocationGraph& g) {
    g.check_preconditions();
    const std::size_t l = g.num_depots(), k = g.num_packages(), n = g.size();
    // Nodes: depots [0, l), package entries [l, l+k), package exits [l+k, l+2k), source, sink.
    const std::size_t entry0 = l, exit0 = l + k, source = l + 2 * k, sink = source + 1;
    MinCostFlow flow(sink + 1);
    std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> tracked;
    for (std::size_t j = 0; j < k; ++j) {
        // The unit lower bound on entry->exit becomes supply at the exit and demand at the entry.
        flow.add_edge(source, exit0 + j, 1, 0.0);
        flow.add_edge(entry0 + j, sink, 1, 0.0);
    }
    for (std::size_t d = 0; d < l; ++d) {
        for (std::size_t e = 0; e < l; ++e)
            if (d != e && g.has_edge(d, e))
                tracked.push_back({flow.add_edge(d, e, static_cast<int>(k), g.cost(d, e)), {d, e}});
        for (std::size_t j = 0; j < k; ++j) {
            const auto p = g.package_vertex(j);
            if (g.has_edge(d, p)) tracked.push_back({flow.add_edge(d, entry0 + j, 1, g.cost(d, p)), {d, p}});
            if (g.has_edge(p, d)) tracked.push_back({flow.add_edge(exit0 + j, d, 1, g.cost(p, d)), {p, d}});
        }
    }
    const int pushed = flow.run(source, sink, static_cast<int>(k));
    if (pushed != static_cast<int>(k))
        throw InfeasibleError("minimal-connecting tours infeasible: only " + std::to_string(pushed) + " of " +
                              std::to_string(k) + " packages could be connected");

    MCTSolution sol;
    sol.n = n;
    sol.x.assign(n * n, 0);
    for (const auto& [id, uv] : tracked) {
        const int f = flow.flow_on(id);
        sol.at(uv.first, uv.second) = f;
        sol.objective += f * g.cost(uv.first, uv.second);
    }
    return sol;
}

void check_mct(const AllocationGraph& g, const MCTSolution& sol) {
    const std::size_t n = g.size();
    if (sol.n != n || sol.x.size() != n * n) throw ValidationError("solution size does not match graph");
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            const int x = sol.at(u, v);
            if (x < 0) throw ValidationError("negative multiplicity");
            if (x > 0 && !g.has_edge(u, v)) throw ValidationError("multiplicity on an absent edge");
            if ((!g.is_depot(u) || !g.is_depot(v)) && x > 1)
                throw ValidationError("package edge used more than once");
        }
    for (std::size_t p = g.num_depots(); p < n; ++p) {
        int in = 0, out = 0;
        for (std::size_t d = 0; d < g.num_depots(); ++d) {
            in += sol.at(d, p);
            out += sol.at(p, d);
        }
        if (in != 1 || out != 1)
            throw ValidationError(package_name(g, p) + " must have exactly one incoming and one outgoing edge");
    }
    for (std::size_t d = 0; d < g.num_depots(); ++d) {
        long balance = 0;
        for (std::size_t v = 0; v < n; ++v) balance += sol.at(v, d) - sol.at(d, v);
        if (balance != 0) throw ValidationError("depot " + std::to_string(d) + " inflow differs from outflow");
    }
}

double tour_length(const AllocationGraph& g, const std::vector<std::uint32_t>& cyclic) {
    double len = 0.0;
    for (std::size_t i = 0; i < cyclic.size(); ++i) len += g.cost(cyclic[i], cyclic[(i + 1) % cyclic.size()]);
    return len;
}

double path_length(const AllocationGraph& g, const std::vector<std::uint32_t>& path) {
    double len = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) len += g.cost(path[i - 1], path[i]);
    return len;
}

std::vector<Tour> extract_tours(const AllocationGraph& g, const MCTSolution& sol) {
    check_mct(g, sol);
    const std::size_t n = g.size();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    std::vector<std::vector<std::uint32_t>> adj(n);  // sorted successor multiset
    for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = 0; v < n; ++v)
            for (int c = 0; c < sol.at(u, v); ++c) {
                adj[u].push_back(v);
                parent[find(u)] = find(v);
            }

    std::vector<Tour> tours;
    std::vector<char> done(n, 0);
    std::vector<std::size_t> next(n, 0);
    for (std::uint32_t d = 0; d < g.num_depots(); ++d) {
        const auto root = find(d);
        if (done[root] || adj[d].empty()) continue;
        done[root] = 1;
        // Hierholzer: the circuit comes out reversed.
        std::vector<std::uint32_t> stack{d}, circuit;
        while (!stack.empty()) {
            const auto u = stack.back();
            if (next[u] < adj[u].size()) {
                stack.push_back(adj[u][next[u]++]);
            } else {
                circuit.push_back(u);
                stack.pop_back();
            }
        }
        std::reverse(circuit.begin(), circuit.end());
        circuit.pop_back();  // closing return to d
        Tour t{std::move(circuit), 0.0};
        t.length = tour_length(g, t.vertices);
        tours.push_back(std::move(t));
    }
    return tours;
}

MergeResult merge_tours(std::vector<Tour> tours, const AllocationGraph& g) {
    if (tours.empty()) throw InputError("merge_tours needs at least one tour");
    const std::size_t l = g.num_depots();
    std::vector<int> comp(l, -1);  // depot -> tour index
    for (std::size_t i = 0; i < tours.size(); ++i)
        for (auto v : tours[i].vertices)
            if (g.is_depot(v)) comp[v] = static_cast<int>(i);

    MergeResult result;
    std::vector<char> alive(tours.size(), 1);
    for (std::size_t remaining = tours.size(); remaining > 1; --remaining) {
        double best = kInf;
        std::uint32_t bd = 0, be = 0;
        for (std::uint32_t d = 0; d < l; ++d) {
            if (comp[d] < 0) continue;
            for (std::uint32_t e = 0; e < l; ++e) {
                if (comp[e] < 0 || comp[e] == comp[d]) continue;
                const double c = g.cost(d, e) + g.cost(e, d);
                if (c < best) {
                    best = c;
                    bd = d;
                    be = e;
                }
            }
        }
        const auto ia = static_cast<std::size_t>(comp[bd]), ib = static_cast<std::size_t>(comp[be]);
        auto& a = tours[ia].vertices;
        const auto& b = tours[ib].vertices;
        const auto pa = static_cast<std::size_t>(std::find(a.begin(), a.end(), bd) - a.begin());
        const auto pb = static_cast<std::size_t>(std::find(b.begin(), b.end(), be) - b.begin());
        // ... d -> d' -> (b's cycle back to d') -> d -> ...
        std::vector<std::uint32_t> merged(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(pa + 1));
        for (std::size_t i = 0; i < b.size(); ++i) merged.push_back(b[(pb + i) % b.size()]);
        merged.push_back(be);
        merged.push_back(bd);
        merged.insert(merged.end(), a.begin() + static_cast<std::ptrdiff_t>(pa + 1), a.end());
        tours[ia].length += tours[ib].length + best;
        a = std::move(merged);
        alive[ib] = 0;
        for (auto& c : comp)
            if (c == static_cast<int>(ib)) c = static_cast<int>(ia);
        result.merges.emplace_back(bd, be);
    }
    for (std::size_t i = 0; i < tours.size(); ++i)
        if (alive[i]) result.tour = std::move(tours[i]);
    return result;
}

std::vector<DeliveryPath> split_tour(const Tour& tour, std::size_t m, const AllocationGraph& g) {
    if (m == 0) throw InputError("agent count must be at least 1");
    std::vector<DeliveryPath> paths(m);
    const auto& t = tour.vertices;
    const std::size_t n = t.size();
    auto first_pkg = std::find_if(t.begin(), t.end(), [&](std::uint32_t v) { return !g.is_depot(v); });
    if (first_pkg == t.end()) return paths;

    // Rotate so the walk starts at the depot preceding the first package.
    const auto start = static_cast<std::size_t>(first_pkg - t.begin() + static_cast<std::ptrdiff_t>(n) - 1) % n;
    std::vector<std::uint32_t> walk;
    for (std::size_t i = 0; i <= n; ++i) walk.push_back(t[(start + i) % n]);

    // A unit is the stretch from the previous package's return depot through (d, p, d').
    struct Unit {
        std::size_t begin;  // index in walk of the depot where the unit's hop chain starts
        std::size_t pkg;    // index of the package
    };
    std::vector<Unit> units;
    std::size_t chain_start = 0;
    for (std::size_t i = 1; i < walk.size(); ++i)
        if (!g.is_depot(walk[i])) {
            units.push_back({chain_start, i});
            chain_start = i + 1;
        }

    const double share = tour.length / static_cast<double>(m);
    std::size_t u = 0;
    for (std::size_t i = 0; i < m && u < units.size(); ++i) {
        auto& path = paths[i];
        const bool last = i + 1 == m;
        while (u < units.size() && (last || path.length < share)) {
            // The first unit of a path starts at its own dispatch depot; later ones keep the hop chain.
            const std::size_t from = path.vertices.empty() ? units[u].pkg - 1 : units[u].begin + 1;
            for (std::size_t j = from; j <= units[u].pkg + 1; ++j) path.vertices.push_back(walk[j]);
            path.length = path_length(g, path.vertices);
            ++u;
        }
    }
    return paths;
}

BoundReport bound_terms(const AllocationGraph& g) {
    BoundReport r;
    const std::size_t l = g.num_depots();
    for (std::size_t d = 0; d < l; ++d)
        for (std::size_t e = d + 1; e < l; ++e) r.alpha = std::max(r.alpha, g.cost(d, e) + g.cost(e, d));
    for (std::size_t p = l; p < g.size(); ++p)
        for (std::size_t d = 0; d < l; ++d) {
            if (!g.has_edge(d, p)) continue;
            for (std::size_t e = 0; e < l; ++e)
                if (g.has_edge(p, e)) r.beta = std::max(r.beta, g.cost(d, p) + g.cost(p, e));
        }
    return r;
}

AllocationResult merge_split_tours(const AllocationGraph& g, std::size_t m) {
    if (m == 0) throw InputError("agent count must be at least 1");
    AllocationResult result;
    result.bound = bound_terms(g);
    if (g.num_packages() == 0) {
        g.check_preconditions();
        result.paths.assign(m, DeliveryPath{});
        result.mct.n = g.size();
        result.mct.x.assign(g.size() * g.size(), 0);
        return result;
    }
    result.mct = solve_mct(g);
    auto tours = extract_tours(g, result.mct);
    result.initial_tours = tours.size();
    auto merged = merge_tours(std::move(tours), g);
    result.merges = std::move(merged.merges);
    result.paths = split_tour(merged.tour, m, g);
    for (const auto& p : result.paths) result.bound.makespan = std::max(result.bound.makespan, p.length);
    return result;
}

}  // namespace dtn
