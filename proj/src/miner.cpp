#include "elevleak/miner.hpp"

#include "elevleak/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace elevleak::miner {

std::vector<Rect> subdivide_boundary(const Rect& city, std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) throw ValidationError("rows and cols must be >= 1");
    if (!(city.ne.lat > city.sw.lat) || !(city.ne.lon > city.sw.lon))
        throw DegenerateBoundary();

    const double lat_span = city.ne.lat - city.sw.lat;
    const double lon_span = city.ne.lon - city.sw.lon;
    auto lat_edge = [&](std::size_t r) {
        return r == rows ? city.ne.lat
                         : city.sw.lat + lat_span * static_cast<double>(r) / static_cast<double>(rows);
    };
    auto lon_edge = [&](std::size_t c) {
        return c == cols ? city.ne.lon
                         : city.sw.lon + lon_span * static_cast<double>(c) / static_cast<double>(cols);
    };

    std::vector<Rect> cells;
    cells.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            cells.push_back(Rect{{lat_edge(r), lon_edge(c)}, {lat_edge(r + 1), lon_edge(c + 1)}});
    return cells;
}

namespace {

constexpr double kPolylineScale = 1e5;

void decode_axis(const std::string& s, std::size_t& i, long& accumulator) {
    long result = 0;
    int shift = 0;
    while (true) {
        if (i >= s.size()) throw TruncatedChunk();
        const char c = s[i++];
        if (c < 63 || c > 126) throw InvalidCharacter(c);
        const long chunk = c - 63;
        result |= (chunk & 0x1f) << shift;
        shift += 5;
        if (chunk < 0x20) break;
    }
    const long delta = (result & 1) ? ~(result >> 1) : (result >> 1);
    accumulator += delta;
}

void encode_axis(long delta, std::string& out) {
    unsigned long v = static_cast<unsigned long>(delta < 0 ? ~(delta << 1) : (delta << 1));
    while (v >= 0x20) {
        out += static_cast<char>((0x20 | (v & 0x1f)) + 63);
        v >>= 5;
    }
    out += static_cast<char>(v + 63);
}

} // namespace

std::vector<LatLon> decode_polyline(const std::string& encoded) {
    std::vector<LatLon> path;
    long lat = 0, lon = 0;
    std::size_t i = 0;
    while (i < encoded.size()) {
        decode_axis(encoded, i, lat);
        decode_axis(encoded, i, lon);
        path.push_back({static_cast<double>(lat) / kPolylineScale,
                        static_cast<double>(lon) / kPolylineScale});
    }
    return path;
}

std::string encode_polyline(const std::vector<LatLon>& path) {
    std::string out;
    long prev_lat = 0, prev_lon = 0;
    for (const auto& p : path) {
        const long lat = std::lround(p.lat * kPolylineScale);
        const long lon = std::lround(p.lon * kPolylineScale);
        encode_axis(lat - prev_lat, out);
        encode_axis(lon - prev_lon, out);
        prev_lat = lat;
        prev_lon = lon;
    }
    return out;
}

FixtureClient FixtureClient::from_json_text(const std::string& text, const Rect& city,
                                            std::size_t rows, std::size_t cols) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("fixture is not valid json: ") + e.what());
    }

    FixtureClient client;
    client.grid_ = subdivide_boundary(city, rows, cols);
    client.failed_.assign(client.grid_.size(), false);

    if (doc.contains("failed_cells"))
        for (const auto& idx : doc.at("failed_cells")) {
            const auto cell = idx.get<std::size_t>();
            if (cell < client.failed_.size()) client.failed_[cell] = true;
        }

    if (doc.contains("cells")) {
        for (const auto& [key, entries] : doc.at("cells").items()) {
            const std::size_t cell = std::stoul(key);
            auto& segs = client.cells_[cell];
            for (const auto& entry : entries) {
                SegmentPath seg;
                seg.segment_id = entry.at("segment_id").get<std::string>();
                const auto polyline = entry.at("polyline").get<std::string>();
                seg.path = decode_polyline(polyline);
                if (seg.path.empty()) throw DataError("fixture segment has empty path");
                segs.push_back(seg);
                if (entry.contains("elevations")) {
                    client.elevations_by_polyline_[polyline] =
                        entry.at("elevations").get<std::vector<double>>();
                }
            }
        }
    }
    return client;
}

FixtureClient FixtureClient::from_file(const std::string& path, const Rect& city,
                                       std::size_t rows, std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fixture file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), city, rows, cols);
}

std::vector<SegmentPath> FixtureClient::explore(const Rect& boundary) {
    const LatLon c = boundary.center();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!grid_[i].contains(c.lat, c.lon)) continue;
        if (failed_[i]) throw DataError("recorded failure for cell " + std::to_string(i));
        auto it = cells_.find(i);
        return it == cells_.end() ? std::vector<SegmentPath>{} : it->second;
    }
    return {};
}

std::vector<double> FixtureClient::elevations(const std::vector<LatLon>& path) {
    const auto key = encode_polyline(path);
    auto it = elevations_by_polyline_.find(key);
    if (it == elevations_by_polyline_.end())
        throw DataError("fixture has no elevations for path " + key);
    if (it->second.size() != path.size())
        throw DataError("fixture elevation count does not match path length");
    return it->second;
}

MineResult mine_city(ServiceClient& client, const Rect& city, std::size_t rows,
                     std::size_t cols, const std::string& label, unsigned threads) {
    const auto cells = subdivide_boundary(city, rows, cols);

    struct CellOutcome {
        std::vector<MinedSample> samples;
        bool failed = false;
        std::size_t skipped_samples = 0;
    };
    std::vector<CellOutcome> outcomes(cells.size());

    auto mine_cell = [&](std::size_t idx) {
        CellOutcome& out = outcomes[idx];
        std::vector<SegmentPath> segments;
        try {
            segments = client.explore(cells[idx]);
        } catch (const Error&) {
            out.failed = true; // exploration failure loses the whole cell
            return;
        }
        if (segments.size() > 10) segments.resize(10); // top-10 contract
        for (auto& seg : segments) {
            MinedSample sample;
            sample.segment_id = seg.segment_id;
            sample.city_label = label;
            sample.path = seg.path;
            try {
                sample.profile.elevations_m = client.elevations(seg.path);
            } catch (const Error&) {
                ++out.skipped_samples; // elevation failure loses one sample
                continue;
            }
            if (sample.profile.elevations_m.size() != seg.path.size()) {
                ++out.skipped_samples;
                continue;
            }
            out.samples.push_back(std::move(sample));
        }
    };

    if (threads <= 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) mine_cell(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex next_mutex;
        const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
        for (unsigned t = 0; t < n; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t idx;
                    {
                        std::lock_guard<std::mutex> lock(next_mutex);
                        if (next >= cells.size()) return;
                        idx = next++;
                    }
                    mine_cell(idx);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Deterministic merge in cell order; first occurrence of a segment wins.
    MineResult result;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].failed) {
            result.failed_cells.push_back(i);
            continue;
        }
        result.skipped_samples += outcomes[i].skipped_samples;
        for (auto& sample : outcomes[i].samples) {
            if (!seen.insert(sample.segment_id).second) continue;
            result.samples.push_back(std::move(sample));
        }
    }
    return result;
}

} // namespace elevleak::miner
