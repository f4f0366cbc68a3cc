#include "elevleak/dataset.hpp"

#include "elevleak/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace elevleak {

const char* to_string(LabelLevel level) {
    switch (level) {
    case LabelLevel::city: return "city";
    case LabelLevel::borough: return "borough";
    case LabelLevel::region: return "region";
    }
    return "?";
}

void LabeledDataset::validate() const {
    std::set<std::string> ids;
    for (const auto& s : samples) {
        if (s.id.empty()) throw DataError("sample with empty id");
        if (!ids.insert(s.id).second) throw DataError("duplicate sample id '" + s.id + "'");
        if (s.profile.elevations_m.size() < 2)
            throw DataError("sample '" + s.id + "' has fewer than 2 elevation values");
    }
}

const std::string& LabeledDataset::label_of(const Sample& s, LabelLevel level) const {
    switch (level) {
    case LabelLevel::city: return s.city_label;
    case LabelLevel::borough: return s.borough_label;
    case LabelLevel::region: return s.region_label;
    }
    return s.city_label;
}

bool LabeledDataset::has_level(LabelLevel level) const {
    return std::all_of(samples.begin(), samples.end(),
                       [&](const Sample& s) { return !label_of(s, level).empty(); });
}

std::vector<std::string> LabeledDataset::label_names(LabelLevel level) const {
    std::set<std::string> names;
    for (const auto& s : samples) {
        const auto& label = label_of(s, level);
        if (!label.empty()) names.insert(label);
    }
    return {names.begin(), names.end()};
}

std::vector<int> LabeledDataset::int_labels(LabelLevel level,
                                            const std::vector<std::string>& names) const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        const auto& label = label_of(s, level);
        const auto it = std::lower_bound(names.begin(), names.end(), label);
        if (it == names.end() || *it != label) throw MissingLabelLevel(to_string(level));
        out.push_back(static_cast<int>(it - names.begin()));
    }
    return out;
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

std::string to_jsonl(const LabeledDataset& dataset) {
    std::string out;
    for (const auto& s : dataset.samples) {
        nlohmann::ordered_json labels;
        labels["city"] = s.city_label;
        if (!s.borough_label.empty()) labels["borough"] = s.borough_label;
        if (!s.region_label.empty()) labels["region"] = s.region_label;

        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["labels"] = labels;
        // 6 significant digits, serialized as raw JSON numbers.
        std::string elevations = "[";
        for (std::size_t i = 0; i < s.profile.elevations_m.size(); ++i) {
            if (i) elevations += ",";
            elevations += format_number(s.profile.elevations_m[i]);
        }
        elevations += "]";
        j["elevations"] = nlohmann::ordered_json::parse(elevations);
        if (s.profile.sample_spacing)
            j["spacing"] = nlohmann::ordered_json::parse(format_number(*s.profile.sample_spacing));
        j["provenance"] = s.provenance;
        if (!s.source_id.empty()) j["source_id"] = s.source_id;
        out += j.dump();
        out += "\n";
    }
    return out;
}

LabeledDataset from_jsonl(const std::string& text) {
    LabeledDataset ds;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        Sample s;
        s.id = j.at("id").get<std::string>();
        const auto& labels = j.at("labels");
        s.city_label = labels.value("city", "");
        s.borough_label = labels.value("borough", "");
        s.region_label = labels.value("region", "");
        s.profile.elevations_m = j.at("elevations").get<std::vector<double>>();
        if (j.contains("spacing")) s.profile.sample_spacing = j.at("spacing").get<double>();
        s.provenance = j.value("provenance", "raw");
        s.source_id = j.value("source_id", "");
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

void save_jsonl(const std::string& path, const LabeledDataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << to_jsonl(dataset);
}

LabeledDataset load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_jsonl(ss.str());
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string dataset_hash(const LabeledDataset& dataset) { return content_hash(to_jsonl(dataset)); }

} // namespace elevleak
