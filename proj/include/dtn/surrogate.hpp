#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dtn/allocation.hpp"
#include "dtn/transit.hpp"

namespace dtn {

/// Precomputed site-to-site travel times over the transit network. Query points are mapped
/// to their nearest site (a Voronoi cell).
struct SurrogateTable {
    std::vector<GeoPoint> sites;
    std::vector<double> pairwise_time;  // row-major seconds, +inf when unreachable

    std::size_t size() const { return sites.size(); }
    double at(std::size_t a, std::size_t b) const { return pairwise_time[a * sites.size() + b]; }
    /// Nearest site; ties go to the lowest index.
    std::size_t site_of(const GeoPoint& p) const;
};

struct SurrogateOptions {
    double w = 1.1;
    /// Departure time of every pairwise search; defaults to the earliest stop time.
    std::optional<std::int64_t> depart;
};

/// Runs the single-agent search between every ordered pair of sites with half the flight range.
SurrogateTable build_surrogate(const std::vector<GeoPoint>& sites, const std::vector<TransitTrip>& trips,
                               const std::vector<int>& capacities, const DroneSpec& drone,
                               const SurrogateOptions& opt = {});

/// Direct flight time inside one cell, the table entry across cells.
double surrogate_time(const GeoPoint& a, const GeoPoint& b, const SurrogateTable& table, const DroneSpec& drone);

/// Allocation cost function backed by the table; same-cell pairs beyond half the range are +inf.
TravelTimeFn surrogate_travel_time(const SurrogateTable& table, const DroneSpec& drone);

/// FNV-1a digest of everything build_surrogate depends on.
std::uint64_t surrogate_key(const std::vector<GeoPoint>& sites, const std::vector<TransitTrip>& trips,
                            const std::vector<int>& capacities, const DroneSpec& drone, const SurrogateOptions& opt);

void save_surrogate(const std::filesystem::path& path, const SurrogateTable& table, std::uint64_t key);
/// nullopt when the file is missing or was built from different inputs.
std::optional<SurrogateTable> load_surrogate(const std::filesystem::path& path, std::uint64_t key);

/// Loads the cached table at `path` when its key matches, otherwise builds and writes it.
SurrogateTable cached_surrogate(const std::filesystem::path& path, const std::vector<GeoPoint>& sites,
                                const std::vector<TransitTrip>& trips, const std::vector<int>& capacities,
                                const DroneSpec& drone, const SurrogateOptions& opt = {});

}  // namespace dtn
