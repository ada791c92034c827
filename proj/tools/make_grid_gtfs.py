"""Writes a small synthetic GTFS feed: a grid of bus lines over a 10 km square."""
import argparse
import math
from pathlib import Path

SOUTH, WEST = 37.70, -122.50
KM_LAT = 1 / 111.195
KM_LON = 1 / (111.195 * math.cos(math.radians(37.745)))


def hms(t):
    return f"{t // 3600:02d}:{t // 60 % 60:02d}:{t % 60:02d}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--lines", type=int, default=3, help="lines per direction")
    ap.add_argument("--headway", type=int, default=900, help="seconds between departures")
    ap.add_argument("--first", default="08:00:00")
    ap.add_argument("--last", default="09:30:00")
    ap.add_argument("--sec-per-km", type=int, default=200)
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    h, m, s = map(int, a.first.split(":"))
    first = h * 3600 + m * 60 + s
    h, m, s = map(int, a.last.split(":"))
    last = h * 3600 + m * 60 + s

    stops, trips, times = [], [], []
    offsets = [1.5 + i * (7.0 / max(1, a.lines - 1)) for i in range(a.lines)]
    for axis in ("ew", "ns"):
        for li, off in enumerate(offsets):
            route = f"{axis}{li}"
            ids = []
            for k in range(11):
                along = float(k)
                lat_km, lon_km = (off, along) if axis == "ew" else (along, off)
                sid = f"{route}_{k}"
                stops.append((sid, f"{route} stop {k}", SOUTH + lat_km * KM_LAT, WEST + lon_km * KM_LON))
                ids.append(sid)
            for direction, seq in (("a", ids), ("b", ids[::-1])):
                t0 = first
                while t0 <= last:
                    tid = f"{route}{direction}_{hms(t0).replace(':', '')}"
                    trips.append((route, "wk", tid))
                    for i, sid in enumerate(seq):
                        t = t0 + i * a.sec_per_km
                        times.append((tid, hms(t), hms(t), sid, i + 1))
                    t0 += a.headway

    with open(a.out / "stops.txt", "w") as f:
        f.write("stop_id,stop_name,stop_lat,stop_lon\n")
        for sid, name, lat, lon in stops:
            f.write(f"{sid},\"{name}\",{lat:.6f},{lon:.6f}\n")
    with open(a.out / "trips.txt", "w") as f:
        f.write("route_id,service_id,trip_id\n")
        for r in trips:
            f.write(",".join(r) + "\n")
    with open(a.out / "stop_times.txt", "w") as f:
        f.write("trip_id,arrival_time,departure_time,stop_id,stop_sequence\n")
        for r in times:
            f.write(",".join(map(str, r)) + "\n")


if __name__ == "__main__":
    main()
