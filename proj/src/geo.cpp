#include "dtn/geo.hpp"

#include <algorithm>
#include <numbers>

namespace dtn {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double distance(const GeoPoint& u, const GeoPoint& v) {
    if (u == v) return 0.0;
    const double phi1 = u.lat * kDegToRad;
    const double phi2 = v.lat * kDegToRad;
    const double sin_dphi = std::sin((phi2 - phi1) / 2.0);
    const double sin_dlam = std::sin((v.lon - u.lon) * kDegToRad / 2.0);
    const double a = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * sin_dlam * sin_dlam;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

}  // namespace dtn
