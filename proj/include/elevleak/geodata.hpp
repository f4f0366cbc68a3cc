#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elevleak::geodata {

struct TrackPoint {
    double lat = 0.0;
    double lon = 0.0;
    double elevation_m = 0.0;
    std::optional<double> timestamp; // seconds since epoch
};

struct Route {
    std::string id;
    std::vector<TrackPoint> points;
};

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

struct Rect {
    LatLon sw;
    LatLon ne;

    LatLon center() const { return {(sw.lat + ne.lat) / 2.0, (sw.lon + ne.lon) / 2.0}; }
    double lat_span() const { return ne.lat - sw.lat; }
    double lon_span() const { return ne.lon - sw.lon; }
    bool contains(double lat, double lon) const {
        return lat >= sw.lat && lat <= ne.lat && lon >= sw.lon && lon <= ne.lon;
    }
};

struct Region {
    int id = 0;
    LatLon center;
    std::string name; // empty until an external mapping supplies one
};

// Parses the GPX 1.1 subset: trk/trkseg/trkpt with lat/lon attributes, a
// required <ele> child and an optional <time> child. Everything else is
// ignored. The returned route id is empty; callers name routes themselves.
// Throws MalformedXml, MissingElevation, EmptyTrack.
Route parse_gpx(std::string_view bytes);

// Serializes the same subset parse_gpx reads. parse_gpx(write_gpx(r))
// preserves coordinates within 1e-7 degrees.
std::string write_gpx(const Route& route);

// Tight axis-aligned rectangle: sw = per-axis minima, ne = per-axis maxima.
Rect bounding_rect(const Route& route);

// Plain Euclidean distance on (lat, lon) degrees.
double center_distance(const LatLon& a, const LatLon& b);

// Labels a route's rectangle against the running region list. The first
// region (in creation order) whose center lies within threshold_deg of the
// rect center wins; otherwise a new region is appended at the rect center.
// Mutates `regions`; must not be called concurrently.
int assign_region(const Rect& rect, std::vector<Region>& regions, double threshold_deg);

} // namespace elevleak::geodata
