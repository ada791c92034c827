#include "dtn/surrogate.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

#include "dtn/errors.hpp"
#include "dtn/heuristics.hpp"
#include "dtn/mcsp.hpp"

namespace dtn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr char kMagic[8] = {'D', 'T', 'N', 'S', 'U', 'R', '0', '1'};

class Fnv1a {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= b[i];
            h_ *= 1099511628211ull;
        }
    }
    template <class T>
    void value(const T& v) { bytes(&v, sizeof v); }
    void string(const std::string& s) {
        value(s.size());
        bytes(s.data(), s.size());
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 14695981039346656037ull;
};

template <class T>
void put(std::ostream& os, const T& v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
template <class T>
bool get(std::istream& is, T& v) { return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v)); }

}  // namespace

std::size_t SurrogateTable::site_of(const GeoPoint& p) const {
    if (sites.empty()) throw std::logic_error("surrogate table has no sites");
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        const double d = distance(p, sites[s]);
        if (d < best_d) best_d = d, best = s;
    }
    return best;
}

SurrogateTable build_surrogate(const std::vector<GeoPoint>& sites, const std::vector<TransitTrip>& trips,
                               const std::vector<int>& capacities, const DroneSpec& drone,
                               const SurrogateOptions& opt) {
    OperationGraph graph(trips, {}, sites, drone, capacities);
    Heuristics h(graph);
    std::int64_t depart = 0;
    if (opt.depart) depart = *opt.depart;
    else if (!trips.empty()) {
        depart = std::numeric_limits<std::int64_t>::max();
        for (const auto& trip : trips) depart = std::min(depart, trip.stops.front().t);
    }

    SurrogateTable table{sites, std::vector<double>(sites.size() * sites.size(), kInf)};
    SearchOptions so;
    so.w = opt.w;
    so.limit_km = drone.max_flight_km / 2.0;
    for (std::uint32_t a = 0; a < sites.size(); ++a)
        for (std::uint32_t b = 0; b < sites.size(); ++b) {
            if (a == b) {
                table.pairwise_time[a * sites.size() + b] = 0.0;
                continue;
            }
            const auto r = focal_mcsp(graph, h, Vertex::package(a), Vertex::package(b), static_cast<Seconds>(depart), so);
            if (r.status == SearchStatus::Found)
                table.pairwise_time[a * sites.size() + b] = r.arrival() - static_cast<Seconds>(depart);
        }
    return table;
}

double surrogate_time(const GeoPoint& a, const GeoPoint& b, const SurrogateTable& table, const DroneSpec& drone) {
    const auto sa = table.site_of(a), sb = table.site_of(b);
    if (sa == sb) return drone.flight_time(distance(a, b));
    return table.at(sa, sb);
}

TravelTimeFn surrogate_travel_time(const SurrogateTable& table, const DroneSpec& drone) {
    return [&table, drone](const GeoPoint& a, const GeoPoint& b) {
        const auto sa = table.site_of(a), sb = table.site_of(b);
        if (sa == sb) {
            const double d = distance(a, b);
            return d > drone.max_flight_km / 2.0 ? kInf : drone.flight_time(d);
        }
        return table.at(sa, sb);
    };
}

std::uint64_t surrogate_key(const std::vector<GeoPoint>& sites, const std::vector<TransitTrip>& trips,
                            const std::vector<int>& capacities, const DroneSpec& drone, const SurrogateOptions& opt) {
    Fnv1a f;
    f.bytes(kMagic, sizeof kMagic);
    f.value(sites.size());
    for (const auto& s : sites) f.value(s.lat), f.value(s.lon);
    f.value(trips.size());
    for (const auto& trip : trips) {
        f.string(trip.trip_id);
        f.value(trip.stops.size());
        for (const auto& s : trip.stops) f.value(s.location.lat), f.value(s.location.lon), f.value(s.t);
    }
    f.value(capacities.size());
    for (int c : capacities) f.value(c);
    f.value(drone.speed_kmh), f.value(drone.max_flight_km), f.value(opt.w);
    f.value(opt.depart.has_value());
    f.value(opt.depart.value_or(0));
    return f.digest();
}

void save_surrogate(const std::filesystem::path& path, const SurrogateTable& table, std::uint64_t key) {
    // written aside and renamed so concurrent readers never see a partial file
    auto tmp = path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw InputError("cannot write surrogate cache " + path.string());
    os.write(kMagic, sizeof kMagic);
    put(os, key);
    put(os, static_cast<std::uint64_t>(table.size()));
    for (const auto& s : table.sites) put(os, s.lat), put(os, s.lon);
    for (double t : table.pairwise_time) put(os, t);
    os.close();
    if (!os) throw InputError("failed writing surrogate cache " + path.string());
    std::filesystem::rename(tmp, path);
}

std::optional<SurrogateTable> load_surrogate(const std::filesystem::path& path, std::uint64_t key) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[sizeof kMagic];
    std::uint64_t stored = 0, n = 0;
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
    if (!get(is, stored) || stored != key || !get(is, n)) return std::nullopt;
    SurrogateTable t;
    t.sites.resize(n);
    t.pairwise_time.resize(n * n);
    for (auto& s : t.sites)
        if (!get(is, s.lat) || !get(is, s.lon)) return std::nullopt;
    for (auto& v : t.pairwise_time)
        if (!get(is, v)) return std::nullopt;
    return t;
}

SurrogateTable cached_surrogate(const std::filesystem::path& path, const std::vector<GeoPoint>& sites,
                                const std::vector<TransitTrip>& trips, const std::vector<int>& capacities,
                                const DroneSpec& drone, const SurrogateOptions& opt) {
    const auto key = surrogate_key(sites, trips, capacities, drone, opt);
    if (auto t = load_surrogate(path, key)) return *t;
    auto t = build_surrogate(sites, trips, capacities, drone, opt);
    save_surrogate(path, t, key);
    return t;
}

}  // namespace dtn
