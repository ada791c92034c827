#include "dtn/heuristics.hpp"

#include <algorithm>
#include <limits>

#include "dtn/errors.hpp"

namespace dtn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TripMetagraph build_trip_metagraph(const OperationGraph& graph) {
    TripMetagraph mg;
    mg.num_depots = graph.depots().size();
    mg.num_packages = graph.packages().size();
    mg.num_trips = graph.trips().size();
    const std::size_t n = mg.size(), places = mg.num_depots + mg.num_packages;
    mg.cost.assign(n * n, kInf);
    const double sigma = graph.drone().speed_km_per_s();

    std::vector<GeoPoint> place(places);
    for (std::size_t i = 0; i < mg.num_depots; ++i) place[i] = graph.depots()[i];
    for (std::size_t j = 0; j < mg.num_packages; ++j) place[mg.num_depots + j] = graph.packages()[j];

    for (std::size_t u = 0; u < n; ++u) mg.cost[u * n + u] = 0.0;
    for (std::size_t u = 0; u < places; ++u)
        for (std::size_t v = u + 1; v < places; ++v) mg.cost[u * n + v] = mg.cost[v * n + u] = distance(place[u], place[v]);

    for (std::uint32_t ti = 0; ti < mg.num_trips; ++ti) {
        const auto row = mg.trip_index(ti);
        for (std::size_t u = 0; u < places; ++u) {
            double best = kInf;
            for (auto s = graph.trip_begin(ti); s < graph.trip_end(ti); ++s)
                best = std::min(best, distance(place[u], graph.location(Vertex::transit(s))));
            mg.cost[row * n + u] = mg.cost[u * n + row] = best;
        }
    }

    // Trip to trip: closest pair of stops where the second can be reached in time from the first.
    for (std::uint32_t a = 0; a < mg.num_trips; ++a)
        for (std::uint32_t b = 0; b < mg.num_trips; ++b) {
            if (a == b) continue;
            double best = kInf;
            for (auto s = graph.trip_begin(a); s < graph.trip_end(a); ++s)
                for (auto r = graph.trip_begin(b); r < graph.trip_end(b); ++r) {
                    const Seconds dt = graph.stop_time(r) - graph.stop_time(s);
                    if (dt < 0.0) continue;
                    const double d = distance(graph.location(Vertex::transit(s)), graph.location(Vertex::transit(r)));
                    if (sigma * dt + 1e-9 >= d) best = std::min(best, d);
                }
            mg.cost[mg.trip_index(a) * n + mg.trip_index(b)] = best;
        }
    return mg;
}

DistanceTable::DistanceTable(const TripMetagraph& mg) : n_(mg.size()), d_(mg.cost) {
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t i = 0; i < n_; ++i) {
            const double ik = d_[i * n_ + k];
            if (ik == kInf) continue;
            for (std::size_t j = 0; j < n_; ++j) d_[i * n_ + j] = std::min(d_[i * n_ + j], ik + d_[k * n_ + j]);
        }
}

Heuristics::Heuristics(const OperationGraph& graph)
    : graph_(&graph), mg_(build_trip_metagraph(graph)), table_(mg_) {}

std::size_t Heuristics::row_of(const Vertex& v) const {
    switch (v.kind) {
        case VertexKind::Depot: return mg_.depot_index(v.index);
        case VertexKind::Package: return mg_.package_index(v.index);
        case VertexKind::Transit: return mg_.trip_index(graph_->trip_of(v.index));
    }
    return 0;
}

Seconds Heuristics::time(const Vertex& v, const Vertex& goal) const {
    return graph_->drone().flight_time(distance(graph_->location(v), graph_->location(goal)));
}

double Heuristics::dist(const Vertex& v, const Vertex& goal) const {
    if (goal.is_transit()) throw InputError("distance heuristic needs a depot or package goal");
    if (v == goal) return 0.0;
    return table_.at(row_of(v), row_of(goal));
}

double radical_inverse(std::uint64_t index, std::uint32_t base) {
    double result = 0.0, f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

std::vector<GeoPoint> halton_sites(const BoundingBox& bbox, std::size_t n) {
    if (n == 0) throw InputError("site count must be positive");
    if (!bbox.valid()) throw InputError("invalid bounding box");
    std::vector<GeoPoint> out;
    out.reserve(n);
    for (std::uint64_t i = 1; i <= n; ++i) {
        const double x = radical_inverse(i, 2), y = radical_inverse(i, 3);
        out.push_back({bbox.min.lat + y * (bbox.max.lat - bbox.min.lat), bbox.min.lon + x * (bbox.max.lon - bbox.min.lon)});
    }
    return out;
}

}  // namespace dtn
