#include "elevleak/models/cnn.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/models/mlp.hpp" // softmax
#include "elevleak/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace elevleak::models {

namespace {

constexpr int kIn = imagerep::kImageSize; // 32
constexpr int kK = CnnModel::kKernel;
constexpr int kPad = CnnModel::kPad;

// out[oc][y][x] = b[oc] + sum_ic sum_ky,kx w[oc][ic][ky][kx] * in[ic][y+ky-pad][x+kx-pad]
void conv_forward(const double* __restrict in, int c_in, int side, const double* __restrict w,
                  const double* __restrict b, double* __restrict out, int c_out) {
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (int oc = 0; oc < c_out; ++oc) {
        double* __restrict out_plane = out + static_cast<std::size_t>(oc) * plane;
        std::fill(out_plane, out_plane + plane, b[oc]);
        for (int ic = 0; ic < c_in; ++ic) {
            const double* __restrict in_plane = in + static_cast<std::size_t>(ic) * plane;
            const double* w_base =
                w + ((static_cast<std::size_t>(oc) * c_in + ic) * kK) * kK;
            for (int ky = 0; ky < kK; ++ky) {
                for (int kx = 0; kx < kK; ++kx) {
                    const double wv = w_base[ky * kK + kx];
                    const int y_lo = std::max(0, kPad - ky);
                    const int y_hi = std::min(side, side + kPad - ky);
                    const int x_lo = std::max(0, kPad - kx);
                    const int x_hi = std::min(side, side + kPad - kx);
                    for (int y = y_lo; y < y_hi; ++y) {
                        double* __restrict orow = out_plane + static_cast<std::size_t>(y) * side;
                        const double* __restrict irow =
                            in_plane + static_cast<std::size_t>(y + ky - kPad) * side + (kx - kPad);
                        for (int x = x_lo; x < x_hi; ++x) orow[x] += wv * irow[x];
                    }
                }
            }
        }
    }
}

void conv_backward(const double* __restrict in, int c_in, int side, const double* __restrict w,
                   const double* __restrict d_out, int c_out, double* __restrict d_in,
                   double* __restrict d_w, double* __restrict d_b) {
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (int oc = 0; oc < c_out; ++oc) {
        const double* __restrict dout_plane = d_out + static_cast<std::size_t>(oc) * plane;
        for (std::size_t i = 0; i < plane; ++i) d_b[oc] += dout_plane[i];
        for (int ic = 0; ic < c_in; ++ic) {
            const double* __restrict in_plane = in + static_cast<std::size_t>(ic) * plane;
            double* __restrict din_plane =
                d_in ? d_in + static_cast<std::size_t>(ic) * plane : nullptr;
            const std::size_t w_base = ((static_cast<std::size_t>(oc) * c_in + ic) * kK) * kK;
            for (int ky = 0; ky < kK; ++ky) {
                for (int kx = 0; kx < kK; ++kx) {
                    const double wv = w[w_base + ky * kK + kx];
                    double dw = 0.0;
                    const int y_lo = std::max(0, kPad - ky);
                    const int y_hi = std::min(side, side + kPad - ky);
                    const int x_lo = std::max(0, kPad - kx);
                    const int x_hi = std::min(side, side + kPad - kx);
                    for (int y = y_lo; y < y_hi; ++y) {
                        const double* __restrict dorow =
                            dout_plane + static_cast<std::size_t>(y) * side;
                        const double* __restrict irow =
                            in_plane + static_cast<std::size_t>(y + ky - kPad) * side + (kx - kPad);
                        for (int x = x_lo; x < x_hi; ++x) dw += dorow[x] * irow[x];
                        if (din_plane) {
                            double* __restrict dirow = din_plane +
                                                       static_cast<std::size_t>(y + ky - kPad) *
                                                           side +
                                                       (kx - kPad);
                            for (int x = x_lo; x < x_hi; ++x) dirow[x] += wv * dorow[x];
                        }
                    }
                    d_w[w_base + ky * kK + kx] += dw;
                }
            }
        }
    }
}

void relu_forward(double* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] < 0.0) a[i] = 0.0;
}

// argmax per 2x2 block, first-in-scan-order on ties.
void maxpool_forward(const double* in, int channels, int side, double* out, int* argmax) {
    const int half = side / 2;
    for (int c = 0; c < channels; ++c) {
        const double* in_plane = in + static_cast<std::size_t>(c) * side * side;
        double* out_plane = out + static_cast<std::size_t>(c) * half * half;
        int* arg_plane = argmax + static_cast<std::size_t>(c) * half * half;
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) {
                int best = (2 * y) * side + 2 * x;
                double best_v = in_plane[best];
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const int idx = (2 * y + dy) * side + 2 * x + dx;
                        if (in_plane[idx] > best_v) {
                            best_v = in_plane[idx];
                            best = idx;
                        }
                    }
                out_plane[y * half + x] = best_v;
                arg_plane[y * half + x] = best;
            }
        }
    }
}

void maxpool_backward(const double* d_out, const int* argmax, int channels, int side,
                      double* d_in) {
    const int half = side / 2;
    for (int c = 0; c < channels; ++c) {
        const double* dout_plane = d_out + static_cast<std::size_t>(c) * half * half;
        const int* arg_plane = argmax + static_cast<std::size_t>(c) * half * half;
        double* din_plane = d_in + static_cast<std::size_t>(c) * side * side;
        for (int i = 0; i < half * half; ++i) din_plane[arg_plane[i]] += dout_plane[i];
    }
}

struct Scratch {
    std::vector<double> conv1_out, pool1_out, conv2_out, pool2_out;
    std::vector<int> arg1, arg2;
    std::vector<double> d_conv1, d_pool1, d_conv2, d_pool2;

    explicit Scratch(const CnnModel& m)
        : conv1_out(static_cast<std::size_t>(m.c1) * kIn * kIn),
          pool1_out(static_cast<std::size_t>(m.c1) * 16 * 16),
          conv2_out(static_cast<std::size_t>(m.c2) * 16 * 16),
          pool2_out(static_cast<std::size_t>(m.c2) * 8 * 8),
          arg1(static_cast<std::size_t>(m.c1) * 16 * 16),
          arg2(static_cast<std::size_t>(m.c2) * 8 * 8),
          d_conv1(conv1_out.size()),
          d_pool1(pool1_out.size()),
          d_conv2(conv2_out.size()),
          d_pool2(pool2_out.size()) {}
};

std::vector<double> forward_into(const CnnModel& model, const ImageTensor& image, Scratch& s) {
    const double* w1 = model.params.data() + model.conv1_w_offset();
    const double* b1 = model.params.data() + model.conv1_b_offset();
    const double* w2 = model.params.data() + model.conv2_w_offset();
    const double* b2 = model.params.data() + model.conv2_b_offset();
    const double* wf = model.params.data() + model.fc_w_offset();
    const double* bf = model.params.data() + model.fc_b_offset();

    conv_forward(image.values.data(), 3, kIn, w1, b1, s.conv1_out.data(), model.c1);
    relu_forward(s.conv1_out.data(), s.conv1_out.size());
    maxpool_forward(s.conv1_out.data(), model.c1, kIn, s.pool1_out.data(), s.arg1.data());

    conv_forward(s.pool1_out.data(), model.c1, 16, w2, b2, s.conv2_out.data(), model.c2);
    relu_forward(s.conv2_out.data(), s.conv2_out.size());
    maxpool_forward(s.conv2_out.data(), model.c2, 16, s.pool2_out.data(), s.arg2.data());

    const std::size_t flat = model.fc_flat_dim();
    std::vector<double> logits(static_cast<std::size_t>(model.classes));
    for (int k = 0; k < model.classes; ++k) {
        const double* row = wf + static_cast<std::size_t>(k) * flat;
        double acc = bf[k];
        for (std::size_t i = 0; i < flat; ++i) acc += row[i] * s.pool2_out[i];
        logits[static_cast<std::size_t>(k)] = acc;
    }
    return logits;
}

// Returns this sample's weighted CE contribution (already scaled by
// weight / batch_size) and accumulates the gradient.
double backward_sample(const CnnModel& model, const ImageTensor& image, int target,
                       double scale, Scratch& s, std::vector<double>& grad) {
    auto logits = forward_into(model, image, s);
    auto proba = softmax(logits);
    const double loss =
        -std::log(std::max(proba[static_cast<std::size_t>(target)], 1e-300)) * scale;

    const std::size_t flat = model.fc_flat_dim();
    const double* wf = model.params.data() + model.fc_w_offset();
    double* gwf = grad.data() + model.fc_w_offset();
    double* gbf = grad.data() + model.fc_b_offset();

    std::fill(s.d_pool2.begin(), s.d_pool2.end(), 0.0);
    for (int k = 0; k < model.classes; ++k) {
        const double dlogit =
            (proba[static_cast<std::size_t>(k)] - (k == target ? 1.0 : 0.0)) * scale;
        const double* row = wf + static_cast<std::size_t>(k) * flat;
        double* grow = gwf + static_cast<std::size_t>(k) * flat;
        for (std::size_t i = 0; i < flat; ++i) {
            grow[i] += dlogit * s.pool2_out[i];
            s.d_pool2[i] += dlogit * row[i];
        }
        gbf[k] += dlogit;
    }

    std::fill(s.d_conv2.begin(), s.d_conv2.end(), 0.0);
    maxpool_backward(s.d_pool2.data(), s.arg2.data(), model.c2, 16, s.d_conv2.data());
    for (std::size_t i = 0; i < s.d_conv2.size(); ++i)
        if (s.conv2_out[i] <= 0.0) s.d_conv2[i] = 0.0; // ReLU gate

    std::fill(s.d_pool1.begin(), s.d_pool1.end(), 0.0);
    conv_backward(s.pool1_out.data(), model.c1, 16,
                  model.params.data() + model.conv2_w_offset(), s.d_conv2.data(), model.c2,
                  s.d_pool1.data(), grad.data() + model.conv2_w_offset(),
                  grad.data() + model.conv2_b_offset());

    std::fill(s.d_conv1.begin(), s.d_conv1.end(), 0.0);
    maxpool_backward(s.d_pool1.data(), s.arg1.data(), model.c1, kIn, s.d_conv1.data());
    for (std::size_t i = 0; i < s.d_conv1.size(); ++i)
        if (s.conv1_out[i] <= 0.0) s.d_conv1[i] = 0.0;

    conv_backward(image.values.data(), 3, kIn, model.params.data() + model.conv1_w_offset(),
                  s.d_conv1.data(), model.c1, nullptr, grad.data() + model.conv1_w_offset(),
                  grad.data() + model.conv1_b_offset());
    return loss;
}

void check_image(const ImageTensor& image) {
    if (image.values.size() != static_cast<std::size_t>(3 * kIn * kIn))
        throw ShapeMismatch("image must be 3x32x32");
}

} // namespace

std::vector<double> cnn_forward(const CnnModel& model, const ImageTensor& image,
                                CnnTrace* trace) {
    check_image(image);
    Scratch s(model);
    auto logits = forward_into(model, image, s);
    if (trace) {
        trace->conv1 = s.conv1_out;
        trace->pool1 = s.pool1_out;
        trace->conv2 = s.conv2_out;
        trace->pool2 = s.pool2_out;
    }
    return logits;
}

int CnnModel::predict(const ImageTensor& image) const {
    const auto logits = cnn_forward(*this, image);
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

CnnModel make_cnn(int classes, std::uint64_t seed, int c1, int c2) {
    if (classes < 1) throw ValidationError("cnn needs at least one class");
    CnnModel model;
    model.c1 = c1;
    model.c2 = c2;
    model.classes = classes;
    model.params.assign(model.param_count(), 0.0);

    Rng rng(seed);
    auto he_fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
        const double s = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) model.params[offset + i] = rng.normal(0.0, s);
    };
    he_fill(model.conv1_w_offset(), static_cast<std::size_t>(c1) * 3 * kK * kK,
            static_cast<std::size_t>(3) * kK * kK);
    he_fill(model.conv2_w_offset(),
            static_cast<std::size_t>(c2) * static_cast<std::size_t>(c1) * kK * kK,
            static_cast<std::size_t>(c1) * kK * kK);
    he_fill(model.fc_w_offset(), static_cast<std::size_t>(classes) * model.fc_flat_dim(),
            model.fc_flat_dim());
    return model;
}

double cnn_loss_and_grad(const CnnModel& model, const std::vector<ImageTensor>& images,
                         const std::vector<int>& labels, const std::vector<std::size_t>& batch,
                         const std::vector<double>& class_weights, std::vector<double>& grad,
                         unsigned threads) {
    grad.assign(model.param_count(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    auto weight_of = [&](int label) {
        return class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(label)];
    };

    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(batch.size())));
    if (n_threads == 1) {
        Scratch s(model);
        double loss = 0.0;
        for (std::size_t idx : batch) {
            check_image(images[idx]);
            loss += backward_sample(model, images[idx], labels[idx],
                                    weight_of(labels[idx]) * inv_batch, s, grad);
        }
        return loss;
    }

    // Contiguous chunks per thread; partial gradients reduced in thread
    // order so a fixed thread count gives a fixed result.
    std::vector<std::vector<double>> partial_grads(n_threads);
    std::vector<double> partial_loss(n_threads, 0.0);
    std::vector<std::thread> pool;
    const std::size_t chunk = (batch.size() + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(batch.size(), lo + chunk);
            partial_grads[t].assign(model.param_count(), 0.0);
            Scratch s(model);
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t idx = batch[i];
                check_image(images[idx]);
                partial_loss[t] += backward_sample(model, images[idx], labels[idx],
                                                   weight_of(labels[idx]) * inv_batch, s,
                                                   partial_grads[t]);
            }
        });
    }
    for (auto& th : pool) th.join();

    double loss = 0.0;
    for (unsigned t = 0; t < n_threads; ++t) {
        loss += partial_loss[t];
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += partial_grads[t][i];
    }
    return loss;
}

std::vector<double> inverse_size_weights(const std::vector<int>& labels, int classes) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(classes), 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    const double n = static_cast<double>(labels.size());
    std::vector<double> weights(static_cast<std::size_t>(classes), 0.0);
    for (int k = 0; k < classes; ++k) {
        const auto nk = counts[static_cast<std::size_t>(k)];
        if (nk == 0) throw EmptyClass("class " + std::to_string(k));
        weights[static_cast<std::size_t>(k)] = n / (static_cast<double>(classes) *
                                                    static_cast<double>(nk));
    }
    return weights;
}

void cnn_train_inplace(CnnModel& model, const std::vector<ImageTensor>& images,
                       const std::vector<int>& labels, const CnnConfig& config,
                       CnnTrainLog* log) {
    if (images.size() != labels.size()) throw LengthMismatch(images.size(), labels.size());
    if (images.empty()) throw ValidationError("empty training set");
    for (int y : labels)
        if (y < 0 || y >= model.classes) throw ShapeMismatch("label outside model classes");

    std::vector<double> weights = config.class_weights;
    if (!weights.empty()) {
        if (weights.size() != static_cast<std::size_t>(model.classes))
            throw ShapeMismatch("one class weight per class required");
        for (double w : weights)
            if (!(w > 0.0)) throw ValidationError("class weights must be positive");
        double mean = 0.0;
        for (double w : weights) mean += w;
        mean /= static_cast<double>(weights.size());
        for (double& w : weights) w /= mean; // normalize to mean 1
    }

    AdamState adam(model.param_count(), config.adam);
    Rng rng = Rng(config.seed).fork(2);

    const std::size_t n = images.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const std::size_t batch_size = std::max<std::size_t>(1, std::min(config.batch_size, n));

    std::vector<double> grad;
    std::vector<std::size_t> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch_size) {
            batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() +
                             static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
            const double loss = cnn_loss_and_grad(model, images, labels, batch, weights, grad,
                                                  config.threads);
            if (!std::isfinite(loss)) throw DivergedLoss(static_cast<std::size_t>(epoch));
            adam.update(model.params, grad);
            epoch_loss += loss;
            ++batches;
        }
        if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
    }
}

CnnModel cnn_train(const std::vector<ImageTensor>& images, const std::vector<int>& labels,
                   const CnnConfig& config, CnnTrainLog* log) {
    int classes = 0;
    for (int y : labels) classes = std::max(classes, y + 1);
    if (classes < 1) throw ValidationError("empty training set");
    CnnModel model = make_cnn(classes, config.seed, config.c1, config.c2);
    cnn_train_inplace(model, images, labels, config, log);
    return model;
}

} // namespace elevleak::models
