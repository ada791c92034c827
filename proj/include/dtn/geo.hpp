#pragma once

#include <cmath>

namespace dtn {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees

    bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Closed latitude/longitude box.
struct BoundingBox {
    GeoPoint min;
    GeoPoint max;

    bool valid() const { return min.valid() && max.valid() && min.lat < max.lat && min.lon < max.lon; }
    bool contains(const GeoPoint& p) const {
        return p.lat >= min.lat && p.lat <= max.lat && p.lon >= min.lon && p.lon <= max.lon;
    }
};

struct DroneSpec {
    double speed_kmh = 25.0;
    double max_flight_km = 7.0;

    bool valid() const { return speed_kmh > 0.0 && max_flight_km > 0.0; }
    double speed_km_per_s() const { return speed_kmh / 3600.0; }
    /// Seconds to fly `km` at cruise speed.
    double flight_time(double km) const { return km / speed_km_per_s(); }
};

/// Great-circle (haversine) distance in km.
double distance(const GeoPoint& u, const GeoPoint& v);

}  // namespace dtn
