#include "elevleak/models/rounds.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/rng.hpp"

#include <algorithm>
#include <map>

namespace elevleak::models {

std::vector<Round> make_rounds(const std::vector<int>& labels, int class_count,
                               const std::vector<std::set<int>>& discard_schedule,
                               std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count)
            throw ValidationError("label outside [0, class_count)");
        by_class[labels[i]].push_back(i);
    }

    std::set<int> remaining;
    for (int k = 0; k < class_count; ++k) {
        if (!by_class.count(k)) throw EmptyClass("class " + std::to_string(k));
        remaining.insert(k);
    }

    const Rng base(seed);
    std::vector<Round> rounds;
    for (std::size_t step = 0; step <= discard_schedule.size(); ++step) {
        if (step > 0) {
            for (int cls : discard_schedule[step - 1]) {
                if (!remaining.erase(cls))
                    throw ValidationError("schedule discards class " + std::to_string(cls) +
                                          " which is not in the remaining set");
            }
        }
        if (remaining.empty()) throw EmptyRound(step);

        std::size_t min_size = SIZE_MAX;
        for (int cls : remaining) min_size = std::min(min_size, by_class[cls].size());

        Round round;
        round.classes.assign(remaining.begin(), remaining.end());
        Rng rng = base.fork(step);
        for (int cls : round.classes) {
            auto pool = by_class[cls];
            rng.shuffle(pool);
            pool.resize(min_size);
            std::sort(pool.begin(), pool.end()); // stable order within the round
            round.sample_indices.insert(round.sample_indices.end(), pool.begin(), pool.end());
        }
        rounds.push_back(std::move(round));
    }
    return rounds;
}

namespace {

// New head sized for `classes`; rows whose global class existed in the
// previous head are copied, the rest keep their fresh initialization.
CnnModel rehead(const CnnModel& prev, const std::vector<int>& prev_classes,
                const std::vector<int>& next_classes, std::uint64_t seed) {
    CnnModel next = make_cnn(static_cast<int>(next_classes.size()), seed, prev.c1, prev.c2);

    // Carry convolutional parameters verbatim.
    std::copy(prev.params.begin() + static_cast<std::ptrdiff_t>(prev.conv1_w_offset()),
              prev.params.begin() + static_cast<std::ptrdiff_t>(prev.fc_w_offset()),
              next.params.begin() + static_cast<std::ptrdiff_t>(next.conv1_w_offset()));

    const std::size_t flat = prev.fc_flat_dim();
    for (std::size_t row = 0; row < next_classes.size(); ++row) {
        const auto it = std::find(prev_classes.begin(), prev_classes.end(), next_classes[row]);
        if (it == prev_classes.end()) continue;
        const std::size_t prev_row = static_cast<std::size_t>(it - prev_classes.begin());
        std::copy_n(prev.params.begin() +
                        static_cast<std::ptrdiff_t>(prev.fc_w_offset() + prev_row * flat),
                    flat,
                    next.params.begin() +
                        static_cast<std::ptrdiff_t>(next.fc_w_offset() + row * flat));
        next.params[next.fc_b_offset() + row] = prev.params[prev.fc_b_offset() + prev_row];
    }
    return next;
}

} // namespace

FineTuneResult fine_tune(const std::vector<ImageTensor>& images, const std::vector<int>& labels,
                         const std::vector<Round>& rounds,
                         const std::vector<CnnConfig>& configs) {
    if (rounds.empty()) throw ValidationError("fine_tune needs at least one round");
    if (configs.size() != rounds.size())
        throw ValidationError("one config per round required (training order)");

    FineTuneResult result;
    std::vector<int> prev_classes;
    CnnModel model;

    for (std::size_t pass = 0; pass < rounds.size(); ++pass) {
        const Round& round = rounds[rounds.size() - 1 - pass]; // reverse creation order
        const CnnConfig& cfg = configs[pass];

        // Relabel to round-local indices (ascending global order).
        std::map<int, int> local;
        for (std::size_t i = 0; i < round.classes.size(); ++i)
            local[round.classes[i]] = static_cast<int>(i);

        std::vector<ImageTensor> round_images;
        std::vector<int> round_labels;
        round_images.reserve(round.sample_indices.size());
        for (std::size_t idx : round.sample_indices) {
            round_images.push_back(images[idx]);
            round_labels.push_back(local.at(labels[idx]));
        }

        if (pass == 0) {
            model = make_cnn(static_cast<int>(round.classes.size()), cfg.seed, cfg.c1, cfg.c2);
        } else {
            model = rehead(model, prev_classes, round.classes, cfg.seed);
        }
        cnn_train_inplace(model, round_images, round_labels, cfg);

        prev_classes = round.classes;
        result.round_models.push_back(model);
        result.round_classes.push_back(round.classes);
    }
    result.final_model = result.round_models.back();
    return result;
}

} // namespace elevleak::models
