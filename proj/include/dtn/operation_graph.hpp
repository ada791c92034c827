#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dtn/constraints.hpp"
#include "dtn/geo.hpp"
#include "dtn/transit.hpp"

namespace dtn {

enum class VertexKind : std::uint8_t { Depot = 0, Package = 1, Transit = 2 };

/// Operation-graph vertex. Depots and packages are indexed into their own lists; transit
/// vertices are indexed by global stop event (trip order, then stop order).
struct Vertex {
    VertexKind kind = VertexKind::Depot;
    std::uint32_t index = 0;

    static Vertex depot(std::uint32_t i) { return {VertexKind::Depot, i}; }
    static Vertex package(std::uint32_t i) { return {VertexKind::Package, i}; }
    static Vertex transit(std::uint32_t i) { return {VertexKind::Transit, i}; }

    bool is_transit() const { return kind == VertexKind::Transit; }
    std::uint64_t key() const { return (static_cast<std::uint64_t>(kind) << 32) | index; }

    friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

inline constexpr int kUnboundedCapacity = -1;

struct Neighbor {
    Vertex v;
    Seconds traversal = 0.0;  // T(e)
    double energy_km = 0.0;   // N(e)
    int capacity = kUnboundedCapacity;
    bool ride = false;
};

struct NeighborQuery {
    Vertex u;
    Seconds t = 0.0;             // current clock at u
    double budget_km = 0.0;      // flight distance still available
    Vertex goal;
    const ConstraintSet* constraints = nullptr;
    bool prune = true;           // keep only non-dominated boardings per trip
};

/// Time-expanded transit stops plus depot and package locations. Flight edges are never
/// stored; they are generated per query. Immutable after construction.
class OperationGraph {
public:
    /// `capacities[i]` is C(e) of the transit edge leaving stop event i (ignored for the last
    /// stop of each trip). Pass an empty vector for capacity 1 everywhere.
    OperationGraph(std::vector<TransitTrip> trips, std::vector<GeoPoint> depots, std::vector<GeoPoint> packages,
                   DroneSpec drone, std::vector<int> capacities = {});

    /// Uniform integer capacity in [lo, hi] per transit edge, reproducible from `seed`.
    static std::vector<int> sample_capacities(const std::vector<TransitTrip>& trips, int lo, int hi,
                                              std::uint64_t seed);

    const DroneSpec& drone() const { return drone_; }
    const std::vector<TransitTrip>& trips() const { return trips_; }
    const std::vector<GeoPoint>& depots() const { return depots_; }
    const std::vector<GeoPoint>& packages() const { return packages_; }

    std::size_t num_transit() const { return stop_loc_.size(); }
    std::uint32_t trip_of(std::uint32_t stop) const { return stop_trip_[stop]; }
    std::uint32_t trip_begin(std::uint32_t trip) const { return trip_offset_[trip]; }
    std::uint32_t trip_end(std::uint32_t trip) const { return trip_offset_[trip + 1]; }
    const TimedStop& stop(std::uint32_t stop) const;
    Seconds stop_time(std::uint32_t stop) const { return static_cast<Seconds>(stop_time_[stop]); }
    bool has_next(std::uint32_t stop) const { return stop + 1 < trip_end(stop_trip_[stop]); }
    /// Capacity of the transit edge stop -> stop + 1.
    int capacity(std::uint32_t edge_tail) const { return capacity_[edge_tail]; }

    const GeoPoint& location(const Vertex& v) const;
    /// Stop time for transit vertices; nullopt for depots and packages.
    std::optional<Seconds> fixed_time(const Vertex& v) const;
    bool contains(const Vertex& v) const;
    bool is_ride(const Vertex& a, const Vertex& b) const {
        return a.is_transit() && b.is_transit() && b.index == a.index + 1 && has_next(a.index);
    }

    /// Out-neighbors of `q.u` at clock `q.t`:
    ///   - the next stop on u's own trip (transit edge, N = 0) unless excluded;
    ///   - for every other trip, stops reachable in time with flight distance within budget.
    ///     With pruning only stops non-dominated in (wait, distance) are kept, scanning
    ///     each trip once in time order;
    ///   - a direct flight to `q.goal` if within budget.
    std::vector<Neighbor> out_neighbors(const NeighborQuery& q) const;

private:
    std::vector<TransitTrip> trips_;
    std::vector<GeoPoint> depots_;
    std::vector<GeoPoint> packages_;
    DroneSpec drone_;
    std::vector<std::uint32_t> trip_offset_;
    std::vector<std::uint32_t> stop_trip_;
    std::vector<GeoPoint> stop_loc_;
    std::vector<std::int64_t> stop_time_;
    std::vector<int> capacity_;
};

}  // namespace dtn
