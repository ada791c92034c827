#pragma once

#include <cstdint>
#include <vector>

#include "dtn/operation_graph.hpp"

namespace dtn {

/// Complete graph over depots, packages and one vertex per trip. Edge cost is a lower bound
/// on the flight distance needed to get from one to the other.
/// Index layout: depots [0, l), packages [l, l+k), trips [l+k, l+k+T).
struct TripMetagraph {
    std::size_t num_depots = 0;
    std::size_t num_packages = 0;
    std::size_t num_trips = 0;
    std::vector<double> cost;  // row-major, +inf when no feasible connection

    std::size_t size() const { return num_depots + num_packages + num_trips; }
    std::size_t depot_index(std::size_t i) const { return i; }
    std::size_t package_index(std::size_t j) const { return num_depots + j; }
    std::size_t trip_index(std::size_t t) const { return num_depots + num_packages + t; }
    double at(std::size_t u, std::size_t v) const { return cost[u * size() + v]; }
};

TripMetagraph build_trip_metagraph(const OperationGraph& graph);

/// All-pairs least flight distance over a metagraph (Floyd-Warshall).
class DistanceTable {
public:
    DistanceTable() = default;
    explicit DistanceTable(const TripMetagraph& mg);

    std::size_t size() const { return n_; }
    double at(std::size_t u, std::size_t v) const { return d_[u * n_ + v]; }

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

inline DistanceTable all_pairs_min_distance(const TripMetagraph& mg) { return DistanceTable(mg); }

/// Admissible time and flight-distance heuristics toward depot or package goals.
class Heuristics {
public:
    explicit Heuristics(const OperationGraph& graph);

    /// Direct flight time to the goal.
    Seconds time(const Vertex& v, const Vertex& goal) const;
    /// Least flight distance still needed to reach the goal; transit vertices use their trip's row.
    double dist(const Vertex& v, const Vertex& goal) const;

    const TripMetagraph& metagraph() const { return mg_; }
    const DistanceTable& table() const { return table_; }
    std::size_t row_of(const Vertex& v) const;

private:
    const OperationGraph* graph_;
    TripMetagraph mg_;
    DistanceTable table_;
};

/// Radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, std::uint32_t base);

/// First `n` Halton points (bases 2 and 3, starting at index 1) scaled into `bbox`;
/// the base-2 coordinate maps to longitude and the base-3 coordinate to latitude.
std::vector<GeoPoint> halton_sites(const BoundingBox& bbox, std::size_t n);

}  // namespace dtn
