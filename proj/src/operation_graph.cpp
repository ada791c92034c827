#include "dtn/operation_graph.hpp"

#include <limits>
#include <random>
#include <stdexcept>

#include "dtn/errors.hpp"

namespace dtn {

namespace {
constexpr double kSlack = 1e-9;
}

OperationGraph::OperationGraph(std::vector<TransitTrip> trips, std::vector<GeoPoint> depots,
                               std::vector<GeoPoint> packages, DroneSpec drone, std::vector<int> capacities)
    : trips_(std::move(trips)), depots_(std::move(depots)), packages_(std::move(packages)), drone_(drone) {
    if (!drone_.valid()) throw InputError("drone speed and range must be positive");
    trip_offset_.reserve(trips_.size() + 1);
    trip_offset_.push_back(0);
    for (std::uint32_t ti = 0; ti < trips_.size(); ++ti) {
        const auto& trip = trips_[ti];
        if (trip.stops.size() < 2) throw InputError("trip " + trip.trip_id + " has fewer than two stops");
        for (std::size_t j = 0; j < trip.stops.size(); ++j) {
            if (j > 0 && trip.stops[j].t <= trip.stops[j - 1].t)
                throw InputError("trip " + trip.trip_id + " has non-increasing stop times");
            stop_trip_.push_back(ti);
            stop_loc_.push_back(trip.stops[j].location);
            stop_time_.push_back(trip.stops[j].t);
        }
        trip_offset_.push_back(static_cast<std::uint32_t>(stop_loc_.size()));
    }
    if (capacities.empty()) capacities.assign(stop_loc_.size(), 1);
    if (capacities.size() != stop_loc_.size()) throw InputError("one capacity per stop event expected");
    for (std::uint32_t i = 0; i < capacities.size(); ++i)
        if (has_next(i) && capacities[i] < 1) throw InputError("transit edge capacity must be at least 1");
    capacity_ = std::move(capacities);
}

std::vector<int> OperationGraph::sample_capacities(const std::vector<TransitTrip>& trips, int lo, int hi,
                                                   std::uint64_t seed) {
    if (lo < 1 || hi < lo) throw InputError("capacity range must satisfy 1 <= lo <= hi");
    std::mt19937_64 rng(seed);
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    std::vector<int> out;
    for (const auto& trip : trips)
        for (std::size_t j = 0; j < trip.stops.size(); ++j) out.push_back(lo + static_cast<int>(rng() % span));
    return out;
}

const TimedStop& OperationGraph::stop(std::uint32_t s) const {
    const auto trip = stop_trip_[s];
    return trips_[trip].stops[s - trip_offset_[trip]];
}

const GeoPoint& OperationGraph::location(const Vertex& v) const {
    switch (v.kind) {
        case VertexKind::Depot: return depots_.at(v.index);
        case VertexKind::Package: return packages_.at(v.index);
        case VertexKind::Transit: return stop_loc_.at(v.index);
    }
    throw std::logic_error("bad vertex kind");
}

std::optional<Seconds> OperationGraph::fixed_time(const Vertex& v) const {
    if (v.is_transit()) return stop_time(v.index);
    return std::nullopt;
}

bool OperationGraph::contains(const Vertex& v) const {
    switch (v.kind) {
        case VertexKind::Depot: return v.index < depots_.size();
        case VertexKind::Package: return v.index < packages_.size();
        case VertexKind::Transit: return v.index < stop_loc_.size();
    }
    return false;
}

std::vector<Neighbor> OperationGraph::out_neighbors(const NeighborQuery& q) const {
    std::vector<Neighbor> out;
    const GeoPoint& from = location(q.u);
    const double reach_per_s = drone_.speed_km_per_s();
    const auto* cons = q.constraints;
    const std::uint32_t own_trip = q.u.is_transit() ? stop_trip_[q.u.index] : std::numeric_limits<std::uint32_t>::max();

    if (q.u.is_transit() && has_next(q.u.index) && (!cons || cons->may_ride(q.u.index))) {
        const auto next = q.u.index + 1;
        out.push_back(Neighbor{Vertex::transit(next), stop_time(next) - q.t, 0.0, capacity_[q.u.index], true});
    }

    for (std::uint32_t ti = 0; ti < trips_.size(); ++ti) {
        if (ti == own_trip) continue;
        const auto begin = trip_offset_[ti], end = trip_offset_[ti + 1];
        if (static_cast<Seconds>(stop_time_[end - 1]) < q.t) continue;
        double best = std::numeric_limits<double>::infinity();
        for (auto s = begin; s < end; ++s) {
            // An excluded edge breaks the ride from earlier boardings, so nothing before it dominates.
            if (s > begin && cons && !cons->may_ride(s - 1)) best = std::numeric_limits<double>::infinity();
            const Seconds wait = static_cast<Seconds>(stop_time_[s]) - q.t;
            if (wait < 0.0) continue;
            const double d = distance(from, stop_loc_[s]);
            if (d > reach_per_s * wait + kSlack || d > q.budget_km + kSlack) continue;
            if (cons && !cons->may_board(s)) continue;
            if (q.prune && !(d < best)) continue;
            best = std::min(best, d);
            out.push_back(Neighbor{Vertex::transit(s), wait, d, kUnboundedCapacity, false});
        }
    }

    if (!(q.u == q.goal)) {
        const double d = distance(from, location(q.goal));
        if (d <= q.budget_km + kSlack)
            out.push_back(Neighbor{q.goal, drone_.flight_time(d), d, kUnboundedCapacity, false});
    }
    return out;
}

}  // namespace dtn
