#pragma once

#include "elevleak/imagerep.hpp"
#include "elevleak/models/adam.hpp"

#include <cstdint>
#include <vector>

namespace elevleak::models {

using imagerep::ImageTensor;

// CONV(5,1,2) -> ReLU -> MAXPOOL(2,2) -> CONV(5,1,2) -> ReLU -> MAXPOOL(2,2)
// -> FCON. Spatial trace 32 -> 32 -> 16 -> 16 -> 8. Parameters are one flat
// vector, same rationale as MlpModel.
struct CnnModel {
    int c1 = 16;
    int c2 = 32;
    int classes = 0;
    std::vector<double> params;

    static constexpr int kKernel = 5;
    static constexpr int kPad = 2;

    std::size_t conv1_w_offset() const { return 0; }
    std::size_t conv1_b_offset() const {
        return static_cast<std::size_t>(c1) * 3 * kKernel * kKernel;
    }
    std::size_t conv2_w_offset() const { return conv1_b_offset() + static_cast<std::size_t>(c1); }
    std::size_t conv2_b_offset() const {
        return conv2_w_offset() + static_cast<std::size_t>(c2) * static_cast<std::size_t>(c1) *
                                      kKernel * kKernel;
    }
    std::size_t fc_w_offset() const { return conv2_b_offset() + static_cast<std::size_t>(c2); }
    std::size_t fc_flat_dim() const { return static_cast<std::size_t>(c2) * 8 * 8; }
    std::size_t fc_b_offset() const {
        return fc_w_offset() + static_cast<std::size_t>(classes) * fc_flat_dim();
    }
    std::size_t param_count() const { return fc_b_offset() + static_cast<std::size_t>(classes); }

    int predict(const ImageTensor& image) const;
};

CnnModel make_cnn(int classes, std::uint64_t seed, int c1 = 16, int c2 = 32);

// Copies of the post-stage activations, for shape and pooling assertions:
// conv outputs are post-ReLU.
struct CnnTrace {
    std::vector<double> conv1; // c1 x 32 x 32
    std::vector<double> pool1; // c1 x 16 x 16
    std::vector<double> conv2; // c2 x 16 x 16
    std::vector<double> pool2; // c2 x 8 x 8
};

// Forward pass; throws ShapeMismatch unless the image is 3x32x32.
std::vector<double> cnn_forward(const CnnModel& model, const ImageTensor& image,
                                CnnTrace* trace = nullptr);

// Weighted softmax cross-entropy over a batch: mean of w[y_i] * CE_i.
// `class_weights` are used as given here (normalization happens in
// cnn_train). Returns the loss and fills the parameter gradient.
double cnn_loss_and_grad(const CnnModel& model, const std::vector<ImageTensor>& images,
                         const std::vector<int>& labels, const std::vector<std::size_t>& batch,
                         const std::vector<double>& class_weights, std::vector<double>& grad,
                         unsigned threads = 1);

struct CnnConfig {
    int c1 = 16;
    int c2 = 32;
    int epochs = 1000;
    std::size_t batch_size = 32;
    AdamConfig adam; // lr 0.001 default
    std::uint64_t seed = 0;
    // One weight per class; empty means unweighted. Normalized to mean 1
    // before use, so uniform weights reproduce unweighted training exactly.
    std::vector<double> class_weights;
    unsigned threads = 1;
};

struct CnnTrainLog {
    std::vector<double> epoch_loss; // mean batch loss per epoch
};

CnnModel cnn_train(const std::vector<ImageTensor>& images, const std::vector<int>& labels,
                   const CnnConfig& config, CnnTrainLog* log = nullptr);

// Continues training an existing model (fine-tuning rounds reuse this).
void cnn_train_inplace(CnnModel& model, const std::vector<ImageTensor>& images,
                       const std::vector<int>& labels, const CnnConfig& config,
                       CnnTrainLog* log = nullptr);

// weight_k = N / (K * N_k): inversely proportional to class sample size.
std::vector<double> inverse_size_weights(const std::vector<int>& labels, int classes);

} // namespace elevleak::models
