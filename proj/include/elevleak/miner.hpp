#pragma once

#include "elevleak/geodata.hpp"
#include "elevleak/profile.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace elevleak::miner {

using geodata::LatLon;
using geodata::Rect;

struct SegmentPath {
    std::string segment_id;
    std::vector<LatLon> path;
};

struct MinedSample {
    std::string segment_id;
    std::string city_label;
    std::optional<std::string> borough_label;
    ElevationProfile profile;
    std::vector<LatLon> path;
};

// Segment exploration + elevation lookup behind one interface so the whole
// pipeline can run against recorded fixtures. explore() returns at most 10
// segments for a boundary. Implementations must be callable from multiple
// workers or be instantiated per worker.
class ServiceClient {
public:
    virtual ~ServiceClient() = default;
    virtual std::vector<SegmentPath> explore(const Rect& boundary) = 0;
    virtual std::vector<double> elevations(const std::vector<LatLon>& path) = 0;
};

// Plays back a recorded JSON document: {"cells": {"<cell index>": [{
// "segment_id": ..., "polyline": ..., "elevations": [...]}, ...]}}.
// Cell indices are row-major positions in the mining grid. A cell listed
// under "failed_cells" raises ClientError when explored.
class FixtureClient : public ServiceClient {
public:
    static FixtureClient from_json_text(const std::string& text, const Rect& city,
                                        std::size_t rows, std::size_t cols);
    static FixtureClient from_file(const std::string& path, const Rect& city,
                                   std::size_t rows, std::size_t cols);

    std::vector<SegmentPath> explore(const Rect& boundary) override;
    std::vector<double> elevations(const std::vector<LatLon>& path) override;

private:
    std::map<std::size_t, std::vector<SegmentPath>> cells_;
    std::map<std::string, std::vector<double>> elevations_by_polyline_;
    std::vector<Rect> grid_;
    std::vector<bool> failed_;
};

// Splits `city` into rows x cols cells covering it exactly, row-major with
// row 0 at the south edge. Shared edges are bit-identical between neighbours.
std::vector<Rect> subdivide_boundary(const Rect& city, std::size_t rows, std::size_t cols);

// Encoded-polyline format: base-63 ASCII, 5-bit chunks, zigzag deltas, 1e-5
// degree precision.
std::vector<LatLon> decode_polyline(const std::string& encoded);
std::string encode_polyline(const std::vector<LatLon>& path);

struct MineResult {
    std::vector<MinedSample> samples;
    std::vector<std::size_t> failed_cells;
    std::size_t skipped_samples = 0; // elevation lookups that failed
};

// Fig-3 pipeline: subdivide, explore each cell (top-10), fetch elevations,
// label, de-duplicate across cells by segment_id (first occurrence wins).
// Failed cells are skipped and recorded. Cells may be mined concurrently up
// to `threads`; the merge order is always (cell index, within-cell rank).
MineResult mine_city(ServiceClient& client, const Rect& city, std::size_t rows,
                     std::size_t cols, const std::string& label, unsigned threads = 1);

} // namespace elevleak::miner
