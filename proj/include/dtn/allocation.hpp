#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dtn/geo.hpp"

namespace dtn {

/// Pairwise travel-time estimate in seconds; +infinity marks a pair that cannot be
/// served within half the flight range.
using TravelTimeFn = std::function<double(const GeoPoint&, const GeoPoint&)>;

/// Direct flight time, or +infinity beyond half the flight range.
TravelTimeFn direct_flight_surrogate(const DroneSpec& drone);

/// Directed depot/package graph. Vertices 0..l-1 are depots, l..l+k-1 packages.
class AllocationGraph {
public:
    AllocationGraph(std::size_t num_depots, std::size_t num_packages);

    /// Builds from a dense (l+k)x(l+k) row-major cost matrix; +infinity or NaN marks an absent
    /// edge. Package-to-package entries and the diagonal are ignored.
    static AllocationGraph from_costs(std::size_t num_depots, std::size_t num_packages,
                                      const std::vector<double>& costs);

    std::size_t num_depots() const { return depots_; }
    std::size_t num_packages() const { return packages_; }
    std::size_t size() const { return depots_ + packages_; }
    bool is_depot(std::size_t v) const { return v < depots_; }
    std::size_t package_vertex(std::size_t j) const { return depots_ + j; }

    bool has_edge(std::size_t u, std::size_t v) const { return present_[u * size() + v] != 0; }
    double cost(std::size_t u, std::size_t v) const { return cost_[u * size() + v]; }
    void set_edge(std::size_t u, std::size_t v, double c);
    void remove_edge(std::size_t u, std::size_t v) { present_[u * size() + v] = 0; }
    std::size_t num_edges() const;

    /// Throws InfeasibleError when a package lacks an incoming or outgoing depot edge, or the
    /// depot subgraph is not a complete digraph.
    void check_preconditions() const;

private:
    std::size_t depots_;
    std::size_t packages_;
    std::vector<double> cost_;
    std::vector<char> present_;
};

/// Depot-package edges are present when `travel_time` is finite; depot-depot edges are always
/// present and fall back to direct flight time when the estimate is infinite.
AllocationGraph build_allocation_graph(const std::vector<GeoPoint>& depots, const std::vector<GeoPoint>& packages,
                                       const TravelTimeFn& travel_time, const DroneSpec& drone);

struct MCTSolution {
    std::size_t n = 0;
    std::vector<int> x;  // n*n row-major multiplicities
    double objective = 0.0;

    int at(std::size_t u, std::size_t v) const { return x[u * n + v]; }
    int& at(std::size_t u, std::size_t v) { return x[u * n + v]; }
};

/// Solves minimal-connecting tours as a min-cost circulation: each package is split into an
/// entry and an exit node joined by an edge with unit lower bound, depot-depot edges are
/// uncapacitated, and flow is pushed by successive shortest paths.
MCTSolution solve_mct(const AllocationGraph& g);

/// Throws ValidationError unless `sol` satisfies the MCT constraints on `g`.
void check_mct(const AllocationGraph& g, const MCTSolution& sol);

/// Cyclic vertex sequence; `vertices.front()` is a depot and the closing edge returns to it.
struct Tour {
    std::vector<std::uint32_t> vertices;
    double length = 0.0;
};

double tour_length(const AllocationGraph& g, const std::vector<std::uint32_t>& cyclic);

/// One Euler circuit per connected component of the multigraph x.
std::vector<Tour> extract_tours(const AllocationGraph& g, const MCTSolution& sol);

struct MergeResult {
    Tour tour;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> merges;  // depot pairs joined, in order
};

/// Repeatedly joins the two depot components with the cheapest round trip c(d,d') + c(d',d).
MergeResult merge_tours(std::vector<Tour> tours, const AllocationGraph& g);

/// Depot-anchored visiting sequence; consecutive depots denote a depot-to-depot hop.
struct DeliveryPath {
    std::vector<std::uint32_t> vertices;
    double length = 0.0;

    bool empty() const { return vertices.empty(); }
};

double path_length(const AllocationGraph& g, const std::vector<std::uint32_t>& path);

std::vector<DeliveryPath> split_tour(const Tour& tour, std::size_t m, const AllocationGraph& g);

struct BoundReport {
    double alpha = 0.0;
    double beta = 0.0;
    double makespan = 0.0;
    std::optional<double> brute_force_opt;

    bool bound_holds() const { return !brute_force_opt || makespan <= *brute_force_opt + alpha + beta; }
};

/// alpha = max c(d,d') + c(d',d); beta = max c(d,p) + c(p,d').
BoundReport bound_terms(const AllocationGraph& g);

struct AllocationResult {
    std::vector<DeliveryPath> paths;
    BoundReport bound;
    MCTSolution mct;
    std::size_t initial_tours = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> merges;
};

AllocationResult merge_split_tours(const AllocationGraph& g, std::size_t m);

}  // namespace dtn
