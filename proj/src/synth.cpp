#include "elevleak/synth.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/rng.hpp"

#include <algorithm>
#include <cmath>

namespace elevleak::synth {

TerrainField make_field(std::uint64_t seed, double base_m, double amplitude,
                        std::size_t n_bumps, const Rect& boundary) {
    TerrainField field;
    field.seed = seed;
    field.base_m = base_m;
    field.amplitude = amplitude;

    Rng rng(seed);
    const double lat_span = boundary.lat_span();
    const double lon_span = boundary.lon_span();
    for (std::size_t i = 0; i < n_bumps; ++i) {
        GaussianBump bump;
        bump.lat = boundary.sw.lat + rng.next_double() * lat_span;
        bump.lon = boundary.sw.lon + rng.next_double() * lon_span;
        bump.sigma_deg = 0.05 + rng.next_double() * 0.10;
        bump.height_m = (rng.next_double() * 2.0 - 1.0); // scaled by amplitude on evaluation
        field.bumps.push_back(bump);
    }
    return field;
}

double terrain_elevation(const TerrainField& field, double lat, double lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon))
        throw ValidationError("terrain query requires finite coordinates");
    double e = field.base_m;
    for (const auto& bump : field.bumps) {
        const double d2 = (lat - bump.lat) * (lat - bump.lat) +
                          (lon - bump.lon) * (lon - bump.lon);
        e += field.amplitude * bump.height_m *
             std::exp(-d2 / (2.0 * bump.sigma_deg * bump.sigma_deg));
    }
    return e;
}

std::pair<Route, ElevationProfile> sample_route(const TerrainField& field, const Rect& boundary,
                                                const RouteConfig& config, std::uint64_t seed) {
    if (config.n_points < 2) throw ValidationError("routes need at least 2 points");
    Rng rng(seed);

    Route route;
    ElevationProfile profile;
    route.points.reserve(config.n_points);
    profile.elevations_m.reserve(config.n_points);
    profile.sample_spacing = config.step_deg;

    double lat = boundary.sw.lat + rng.next_double() * boundary.lat_span();
    double lon = boundary.sw.lon + rng.next_double() * boundary.lon_span();
    double heading = rng.next_double() * 2.0 * M_PI;

    for (std::size_t i = 0; i < config.n_points; ++i) {
        geodata::TrackPoint pt;
        pt.lat = lat;
        pt.lon = lon;
        pt.elevation_m = terrain_elevation(field, lat, lon);
        route.points.push_back(pt);
        profile.elevations_m.push_back(pt.elevation_m);

        heading += rng.normal(0.0, 0.35); // smooth direction drift
        lat += config.step_deg * std::sin(heading);
        lon += config.step_deg * std::cos(heading);
        if (lat < boundary.sw.lat || lat > boundary.ne.lat) {
            lat = std::clamp(lat, boundary.sw.lat, boundary.ne.lat);
            heading = -heading; // bounce off the edge
        }
        if (lon < boundary.sw.lon || lon > boundary.ne.lon) {
            lon = std::clamp(lon, boundary.sw.lon, boundary.ne.lon);
            heading = M_PI - heading;
        }
    }
    return {std::move(route), std::move(profile)};
}

LabeledDataset gen_city_dataset(const std::vector<CitySpec>& specs, const RouteConfig& config,
                                std::uint64_t seed) {
    LabeledDataset ds;
    const Rng base(seed);
    for (std::size_t c = 0; c < specs.size(); ++c) {
        const auto& spec = specs[c];
        if (spec.count < 1) throw ValidationError("city '" + spec.label + "' has count 0");
        const Rng city_rng = base.fork(c);
        const std::size_t n_boroughs = spec.borough_labels.size();
        for (std::size_t r = 0; r < spec.count; ++r) {
            // Boroughs occupy longitude strips of the city so they differ
            // geographically, not just by label.
            Rect walk_area = spec.boundary;
            std::string borough;
            if (n_boroughs > 0) {
                const std::size_t b = r % n_boroughs;
                const double strip = spec.boundary.lon_span() / static_cast<double>(n_boroughs);
                walk_area.sw.lon = spec.boundary.sw.lon + strip * static_cast<double>(b);
                walk_area.ne.lon = b + 1 == n_boroughs ? spec.boundary.ne.lon
                                                       : walk_area.sw.lon + strip;
                borough = spec.borough_labels[b];
            }
            auto [route, profile] =
                sample_route(spec.field, walk_area, config, city_rng.fork(r).seed());
            Sample s;
            s.id = spec.label + "-" + std::to_string(r);
            s.profile = std::move(profile);
            s.city_label = spec.label;
            s.borough_label = borough;
            s.provenance = "synthetic";
            ds.samples.push_back(std::move(s));
        }
    }
    ds.validate();
    return ds;
}

std::vector<CitySpec> spread_city_specs(std::size_t n_cities, double base0_m, double gap_m,
                                        double bump_height_m, std::size_t routes_per_city,
                                        std::uint64_t seed) {
    std::vector<CitySpec> specs;
    for (std::size_t c = 0; c < n_cities; ++c) {
        CitySpec spec;
        spec.label = "city-" + std::to_string(c);
        // Adjacent 1-degree tiles along the equator.
        spec.boundary = Rect{{0.0, static_cast<double>(c) * 1.0},
                             {1.0, static_cast<double>(c) * 1.0 + 1.0}};
        spec.field = make_field(seed ^ (0x5bd1e995ULL * (c + 1)),
                                base0_m + gap_m * static_cast<double>(c), bump_height_m, 12,
                                spec.boundary);
        spec.count = routes_per_city;
        specs.push_back(std::move(spec));
    }
    return specs;
}

} // namespace elevleak::synth
