#include "dtn/transit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include "dtn/errors.hpp"

namespace dtn {

namespace {

struct CsvTable {
    std::filesystem::path path;
    std::unordered_map<std::string, std::size_t> columns;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)

    std::size_t column(const std::string& name) const {
        auto it = columns.find(name);
        if (it == columns.end()) throw InputError(path.string() + ": missing column '" + name + "'", 1);
        return it->second;
    }
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    CsvTable table{path, {}, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (table.columns.empty()) {
            for (std::size_t i = 0; i < fields.size(); ++i) table.columns.emplace(std::string(trim(fields[i])), i);
            continue;
        }
        table.rows.emplace_back(line_no, std::move(fields));
    }
    if (table.columns.empty()) throw InputError(path.string() + ": empty file");
    return table;
}

const std::string& field(const CsvTable& t, const std::pair<std::size_t, std::vector<std::string>>& row,
                         std::size_t col) {
    if (col >= row.second.size()) throw InputError(t.path.string() + ": too few fields", row.first);
    return row.second[col];
}

double parse_double(const CsvTable& t, std::size_t line, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw InputError(t.path.string() + ": bad number '" + std::string(text) + "'", line);
    return value;
}

struct StopEvent {
    std::uint32_t seq;
    std::int64_t t;
    std::string stop_id;
    std::size_t line;
};

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r' && c != '\n') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::int64_t parse_gtfs_time(std::string_view text) {
    text = trim(text);
    std::int64_t parts[3] = {0, 0, 0};
    std::size_t idx = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    while (idx < 3) {
        auto [next, ec] = std::from_chars(p, end, parts[idx]);
        if (ec != std::errc{} || next == p) throw InputError("bad GTFS time '" + std::string(text) + "'");
        p = next;
        ++idx;
        if (idx < 3) {
            if (p == end || *p != ':') throw InputError("bad GTFS time '" + std::string(text) + "'");
            ++p;
        }
    }
    if (p != end || parts[0] < 0 || parts[1] < 0 || parts[1] > 59 || parts[2] < 0 || parts[2] > 59)
        throw InputError("bad GTFS time '" + std::string(text) + "'");
    return parts[0] * 3600 + parts[1] * 60 + parts[2];
}

std::vector<TransitTrip> load_timetable(const std::filesystem::path& gtfs_dir, const BoundingBox& bbox,
                                        const TimeWindow& window) {
    if (!bbox.valid()) throw InputError("bounding box must satisfy min < max on both axes");
    for (const char* name : {"stops.txt", "trips.txt", "stop_times.txt"})
        if (!std::filesystem::exists(gtfs_dir / name))
            throw InputError("missing GTFS file " + (gtfs_dir / name).string());

    const CsvTable stops = read_csv(gtfs_dir / "stops.txt");
    std::unordered_map<std::string, GeoPoint> stop_loc;
    {
        const auto c_id = stops.column("stop_id"), c_lat = stops.column("stop_lat"),
                   c_lon = stops.column("stop_lon");
        for (const auto& row : stops.rows) {
            GeoPoint g{parse_double(stops, row.first, field(stops, row, c_lat)),
                       parse_double(stops, row.first, field(stops, row, c_lon))};
            if (!g.valid()) throw InputError(stops.path.string() + ": coordinate out of range", row.first);
            stop_loc[std::string(trim(field(stops, row, c_id)))] = g;
        }
    }

    const CsvTable trips = read_csv(gtfs_dir / "trips.txt");
    std::vector<TransitTrip> all;
    std::unordered_map<std::string, std::size_t> trip_index;
    {
        const auto c_id = trips.column("trip_id"), c_route = trips.column("route_id");
        for (const auto& row : trips.rows) {
            std::string id(trim(field(trips, row, c_id)));
            if (trip_index.contains(id)) throw InputError(trips.path.string() + ": duplicate trip_id " + id, row.first);
            trip_index.emplace(id, all.size());
            all.push_back(TransitTrip{id, std::string(trim(field(trips, row, c_route))), {}});
        }
    }

    const CsvTable times = read_csv(gtfs_dir / "stop_times.txt");
    std::vector<std::vector<StopEvent>> events(all.size());
    {
        const auto c_trip = times.column("trip_id"), c_arr = times.column("arrival_time"),
                   c_stop = times.column("stop_id"), c_seq = times.column("stop_sequence");
        for (const auto& row : times.rows) {
            const std::string trip_id(trim(field(times, row, c_trip)));
            const std::string stop_id(trim(field(times, row, c_stop)));
            auto ti = trip_index.find(trip_id);
            if (ti == trip_index.end())
                throw InputError(times.path.string() + ": unknown trip_id " + trip_id, row.first);
            if (!stop_loc.contains(stop_id))
                throw InputError(times.path.string() + ": unknown stop_id " + stop_id, row.first);
            const auto arrival = trim(field(times, row, c_arr));
            // Non-timepoint rows carry no arrival time; they are not interpolated.
            if (arrival.empty()) continue;
            std::int64_t t = 0;
            try {
                t = parse_gtfs_time(arrival);
            } catch (const InputError& e) {
                throw InputError(times.path.string() + ": " + e.what(), row.first);
            }
            const double seq = parse_double(times, row.first, field(times, row, c_seq));
            if (seq < 0 || seq != static_cast<double>(static_cast<std::uint32_t>(seq)))
                throw InputError(times.path.string() + ": bad stop_sequence", row.first);
            events[ti->second].push_back(StopEvent{static_cast<std::uint32_t>(seq), t, stop_id, row.first});
        }
    }

    std::vector<TransitTrip> out;
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto& ev = events[i];
        std::sort(ev.begin(), ev.end(), [](const StopEvent& a, const StopEvent& b) { return a.seq < b.seq; });
        for (std::size_t j = 1; j < ev.size(); ++j)
            if (ev[j].seq == ev[j - 1].seq)
                throw InputError(times.path.string() + ": duplicate stop_sequence in trip " + all[i].trip_id,
                                 ev[j].line);

        // Keep strictly increasing times; a repeated timestamp drops the later event.
        std::vector<TimedStop> timed;
        for (const auto& e : ev) {
            if (!timed.empty() && e.t <= timed.back().t) continue;
            timed.push_back(TimedStop{e.stop_id, e.seq, stop_loc.at(e.stop_id), e.t});
        }

        std::size_t best_begin = 0, best_len = 0;
        for (std::size_t j = 0; j < timed.size();) {
            auto inside = [&](const TimedStop& s) {
                return bbox.contains(s.location) && s.t >= window.begin && s.t <= window.end;
            };
            if (!inside(timed[j])) {
                ++j;
                continue;
            }
            std::size_t k = j;
            while (k < timed.size() && inside(timed[k])) ++k;
            if (k - j > best_len) {
                best_begin = j;
                best_len = k - j;
            }
            j = k;
        }
        if (best_len < 2) continue;

        TransitTrip trip{all[i].trip_id, all[i].route_id, {}};
        trip.stops.assign(timed.begin() + static_cast<std::ptrdiff_t>(best_begin),
                          timed.begin() + static_cast<std::ptrdiff_t>(best_begin + best_len));
        for (auto& s : trip.stops) s.t -= window.begin;
        out.push_back(std::move(trip));
    }
    return out;
}

std::size_t count_stop_events(const std::vector<TransitTrip>& trips) {
    std::size_t n = 0;
    for (const auto& t : trips) n += t.stops.size();
    return n;
}

}  // namespace dtn
