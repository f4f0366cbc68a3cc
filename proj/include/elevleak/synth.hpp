#pragma once

#include "elevleak/dataset.hpp"
#include "elevleak/geodata.hpp"
#include "elevleak/profile.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace elevleak::synth {

using geodata::Rect;
using geodata::Route;

struct GaussianBump {
    double lat = 0.0;
    double lon = 0.0;
    double sigma_deg = 0.01;
    double height_m = 0.0;
};

// Analytic terrain: base elevation plus Gaussian radial bumps, scaled by
// amplitude. Smooth, finite everywhere, a pure function of the seed.
struct TerrainField {
    std::uint64_t seed = 0;
    double base_m = 0.0;
    double amplitude = 1.0;
    std::vector<GaussianBump> bumps;
};

TerrainField make_field(std::uint64_t seed, double base_m, double amplitude,
                        std::size_t n_bumps, const Rect& boundary);

double terrain_elevation(const TerrainField& field, double lat, double lon);

struct RouteConfig {
    std::size_t n_points = 200;
    double step_deg = 0.002; // small relative to bump sigma -> autocorrelated profiles
};

// Seeded random walk inside the boundary with elevations from the field.
std::pair<Route, ElevationProfile> sample_route(const TerrainField& field, const Rect& boundary,
                                                const RouteConfig& config, std::uint64_t seed);

struct CitySpec {
    std::string label;
    TerrainField field;
    Rect boundary;
    std::size_t count = 1;
    std::vector<std::string> borough_labels; // optional: routes round-robin over boroughs
};

LabeledDataset gen_city_dataset(const std::vector<CitySpec>& specs, const RouteConfig& config,
                                std::uint64_t seed);

// Convenience builder used by the CLI and the acceptance experiments:
// `n_cities` fields over adjacent boundaries with base elevations
// base0, base0+gap, base0+2*gap, ...
std::vector<CitySpec> spread_city_specs(std::size_t n_cities, double base0_m, double gap_m,
                                        double bump_height_m, std::size_t routes_per_city,
                                        std::uint64_t seed);

} // namespace elevleak::synth
