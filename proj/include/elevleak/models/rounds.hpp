#pragma once

#include "elevleak/models/cnn.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace elevleak::models {

// One balanced sub-dataset over a reduced class set. sample_indices point
// into the original dataset; classes are the global labels kept, ascending.
struct Round {
    std::vector<std::size_t> sample_indices;
    std::vector<int> classes;
};

// Round 1 keeps every class; each schedule entry discards further classes
// from what remains. Every round is balanced by seeded downsampling to its
// smallest class size.
std::vector<Round> make_rounds(const std::vector<int>& labels, int class_count,
                               const std::vector<std::set<int>>& discard_schedule,
                               std::uint64_t seed);

struct FineTuneResult {
    CnnModel final_model;                 // covers all classes
    std::vector<CnnModel> round_models;   // one checkpoint per trained round
    std::vector<std::vector<int>> round_classes; // classes per checkpoint, training order
};

// Trains rounds in reverse creation order (fewest classes first), carrying
// convolutional parameters between rounds and re-heading the final layer:
// rows of classes present in the previous round are copied, new rows are
// freshly initialized. configs are indexed by training order; configs[0]
// trains the last-created round, configs.back() the all-classes round.
FineTuneResult fine_tune(const std::vector<ImageTensor>& images, const std::vector<int>& labels,
                         const std::vector<Round>& rounds,
                         const std::vector<CnnConfig>& configs);

} // namespace elevleak::models
