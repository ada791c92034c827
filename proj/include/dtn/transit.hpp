#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dtn/geo.hpp"

namespace dtn {

/// Seconds since the start of the planning window.
using Seconds = double;

struct TimedStop {
    std::string stop_id;
    std::uint32_t seq = 0;  // GTFS stop_sequence
    GeoPoint location;
    std::int64_t t = 0;
};

struct TransitTrip {
    std::string trip_id;
    std::string route_id;
    std::vector<TimedStop> stops;  // strictly increasing seq and t
};

/// Service window in seconds since service-day midnight, inclusive at both ends.
struct TimeWindow {
    std::int64_t begin = 0;
    std::int64_t end = 0;
};

/// Parses GTFS HH:MM:SS; hours may exceed 23 for after-midnight service.
std::int64_t parse_gtfs_time(std::string_view text);

/// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads stops.txt, trips.txt and stop_times.txt from `gtfs_dir` and keeps, per trip, the
/// longest contiguous run of stop events that lie inside `bbox` and `window`. Times in the
/// result are relative to `window.begin`. Trips are returned in trips.txt order.
std::vector<TransitTrip> load_timetable(const std::filesystem::path& gtfs_dir, const BoundingBox& bbox,
                                        const TimeWindow& window);

std::size_t count_stop_events(const std::vector<TransitTrip>& trips);

}  // namespace dtn
