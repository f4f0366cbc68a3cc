#pragma once

#include <optional>
#include <vector>

namespace elevleak {

// The attack's only input: a 1-D elevation signal. sample_spacing carries the
// distance-or-time gap between consecutive values when the source knows it.
struct ElevationProfile {
    std::vector<double> elevations_m;
    std::optional<double> sample_spacing;
};

} // namespace elevleak
