#pragma once

#include "elevleak/models/adam.hpp"

#include <cstdint>
#include <vector>

namespace elevleak::models {

// input -> dense(hidden, ReLU) -> dense(classes). Parameters live in one
// contiguous vector so Adam and finite-difference checks can treat the model
// as a flat function of its parameters.
struct MlpModel {
    std::size_t input_dim = 0;
    int hidden = 100;
    int classes = 0;
    std::vector<double> params;

    // layout: w1 [hidden][input], b1 [hidden], w2 [classes][hidden], b2 [classes]
    std::size_t w1_offset() const { return 0; }
    std::size_t b1_offset() const { return static_cast<std::size_t>(hidden) * input_dim; }
    std::size_t w2_offset() const { return b1_offset() + static_cast<std::size_t>(hidden); }
    std::size_t b2_offset() const {
        return w2_offset() + static_cast<std::size_t>(classes) * static_cast<std::size_t>(hidden);
    }
    std::size_t param_count() const {
        return b2_offset() + static_cast<std::size_t>(classes);
    }

    std::vector<double> logits(const std::vector<double>& x) const;
    std::vector<double> predict_proba(const std::vector<double>& x) const;
    int predict(const std::vector<double>& x) const;
};

MlpModel make_mlp(std::size_t input_dim, int hidden, int classes, std::uint64_t seed);

// Mean softmax cross-entropy over `batch` plus parameter gradient.
double mlp_loss_and_grad(const MlpModel& model, const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const std::vector<std::size_t>& batch,
                         std::vector<double>& grad);

struct MlpConfig {
    int hidden = 100;
    int epochs = 1000;
    std::size_t batch_size = 32;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

MlpModel train_mlp(const std::vector<std::vector<double>>& features,
                   const std::vector<int>& labels, const MlpConfig& config = {});

std::vector<double> softmax(std::vector<double> logits);

} // namespace elevleak::models
