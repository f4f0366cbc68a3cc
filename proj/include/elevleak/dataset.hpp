#pragma once

#include "elevleak/profile.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace elevleak {

// One labeled elevation profile. Empty label strings mean "absent at this
// level". source_id links overlap-derived samples back to their origin so
// train/test leakage can be measured.
struct Sample {
    std::string id;
    ElevationProfile profile;
    std::string city_label;
    std::string borough_label;
    std::string region_label;
    std::string provenance = "synthetic"; // raw | mined | synthetic | simulated-overlap
    std::string source_id;
};

enum class LabelLevel { city, borough, region };

const char* to_string(LabelLevel level);

struct LabeledDataset {
    std::vector<Sample> samples;

    // Throws on duplicate ids or empty profiles.
    void validate() const;

    const std::string& label_of(const Sample& s, LabelLevel level) const;
    bool has_level(LabelLevel level) const; // every sample carries the label

    // Distinct labels at a level, sorted; and per-sample integer labels
    // aligned to that ordering.
    std::vector<std::string> label_names(LabelLevel level) const;
    std::vector<int> int_labels(LabelLevel level,
                                const std::vector<std::string>& names) const;
};

// JSONL, one sample per line:
// {"id":..., "labels":{"city":..., "borough":..., "region":...},
//  "elevations":[...], "spacing":..., "provenance":..., "source_id":...}
// Elevation numbers carry 6 significant digits.
std::string to_jsonl(const LabeledDataset& dataset);
LabeledDataset from_jsonl(const std::string& text);
void save_jsonl(const std::string& path, const LabeledDataset& dataset);
LabeledDataset load_jsonl(const std::string& path);

// FNV-1a 64 over the serialized bytes, hex-encoded; identifies a dataset in
// reports.
std::string content_hash(const std::string& bytes);
std::string dataset_hash(const LabeledDataset& dataset);

} // namespace elevleak
