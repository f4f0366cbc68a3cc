#include "elevleak/models/mlp.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/rng.hpp"

#include <algorithm>
#include <cmath>

namespace elevleak::models {

std::vector<double> softmax(std::vector<double> logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        sum += v;
    }
    for (double& v : logits) v /= sum;
    return logits;
}

std::vector<double> MlpModel::logits(const std::vector<double>& x) const {
    if (x.size() != input_dim) throw ShapeMismatch("mlp input dimension");
    const double* w1 = params.data() + w1_offset();
    const double* b1 = params.data() + b1_offset();
    const double* w2 = params.data() + w2_offset();
    const double* b2 = params.data() + b2_offset();

    std::vector<double> h(static_cast<std::size_t>(hidden));
    for (int j = 0; j < hidden; ++j) {
        const double* row = w1 + static_cast<std::size_t>(j) * input_dim;
        double s = b1[j];
        for (std::size_t i = 0; i < input_dim; ++i) s += row[i] * x[i];
        h[static_cast<std::size_t>(j)] = s > 0.0 ? s : 0.0;
    }
    std::vector<double> out(static_cast<std::size_t>(classes));
    for (int k = 0; k < classes; ++k) {
        const double* row = w2 + static_cast<std::size_t>(k) * static_cast<std::size_t>(hidden);
        double s = b2[k];
        for (int j = 0; j < hidden; ++j) s += row[j] * h[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(k)] = s;
    }
    return out;
}

std::vector<double> MlpModel::predict_proba(const std::vector<double>& x) const {
    return softmax(logits(x));
}

int MlpModel::predict(const std::vector<double>& x) const {
    const auto l = logits(x);
    return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

MlpModel make_mlp(std::size_t input_dim, int hidden, int classes, std::uint64_t seed) {
    MlpModel model;
    model.input_dim = input_dim;
    model.hidden = hidden;
    model.classes = classes;
    model.params.assign(model.param_count(), 0.0);

    Rng rng(seed);
    const double s1 = std::sqrt(2.0 / static_cast<double>(input_dim)); // He init for ReLU
    const double s2 = std::sqrt(2.0 / static_cast<double>(hidden));
    double* w1 = model.params.data() + model.w1_offset();
    for (std::size_t i = 0; i < static_cast<std::size_t>(hidden) * input_dim; ++i)
        w1[i] = rng.normal(0.0, s1);
    double* w2 = model.params.data() + model.w2_offset();
    for (std::size_t i = 0;
         i < static_cast<std::size_t>(classes) * static_cast<std::size_t>(hidden); ++i)
        w2[i] = rng.normal(0.0, s2);
    return model;
}

double mlp_loss_and_grad(const MlpModel& model, const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const std::vector<std::size_t>& batch,
                         std::vector<double>& grad) {
    grad.assign(model.param_count(), 0.0);
    const double* w1 = model.params.data() + model.w1_offset();
    const double* b1 = model.params.data() + model.b1_offset();
    const double* w2 = model.params.data() + model.w2_offset();
    const double* b2 = model.params.data() + model.b2_offset();
    double* gw1 = grad.data() + model.w1_offset();
    double* gb1 = grad.data() + model.b1_offset();
    double* gw2 = grad.data() + model.w2_offset();
    double* gb2 = grad.data() + model.b2_offset();

    const std::size_t hidden = static_cast<std::size_t>(model.hidden);
    const std::size_t classes = static_cast<std::size_t>(model.classes);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    std::vector<double> h(hidden), pre(hidden), dh(hidden);
    double loss = 0.0;
    for (std::size_t idx : batch) {
        const auto& x = features[idx];
        const int target = labels[idx];

        for (std::size_t j = 0; j < hidden; ++j) {
            const double* row = w1 + j * model.input_dim;
            double s = b1[j];
            for (std::size_t i = 0; i < model.input_dim; ++i) s += row[i] * x[i];
            pre[j] = s;
            h[j] = s > 0.0 ? s : 0.0;
        }
        std::vector<double> logits(classes);
        for (std::size_t k = 0; k < classes; ++k) {
            const double* row = w2 + k * hidden;
            double s = b2[k];
            for (std::size_t j = 0; j < hidden; ++j) s += row[j] * h[j];
            logits[k] = s;
        }
        auto proba = softmax(logits);
        loss -= std::log(std::max(proba[static_cast<std::size_t>(target)], 1e-300)) * inv_batch;

        // dL/dlogit_k = (p_k - 1[k==target]) / B
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t k = 0; k < classes; ++k) {
            const double dlogit =
                (proba[k] - (static_cast<int>(k) == target ? 1.0 : 0.0)) * inv_batch;
            double* grow = gw2 + k * hidden;
            const double* row = w2 + k * hidden;
            for (std::size_t j = 0; j < hidden; ++j) {
                grow[j] += dlogit * h[j];
                dh[j] += dlogit * row[j];
            }
            gb2[k] += dlogit;
        }
        for (std::size_t j = 0; j < hidden; ++j) {
            if (pre[j] <= 0.0) continue;
            double* grow = gw1 + j * model.input_dim;
            for (std::size_t i = 0; i < model.input_dim; ++i) grow[i] += dh[j] * x[i];
            gb1[j] += dh[j];
        }
    }
    return loss;
}

MlpModel train_mlp(const std::vector<std::vector<double>>& features,
                   const std::vector<int>& labels, const MlpConfig& config) {
    if (features.size() != labels.size()) throw LengthMismatch(features.size(), labels.size());
    if (features.empty()) throw SingleClassDataset();
    int classes = 0;
    bool multi = false;
    for (int y : labels) {
        classes = std::max(classes, y + 1);
        if (y != labels.front()) multi = true;
    }
    if (!multi) throw SingleClassDataset();

    MlpModel model = make_mlp(features[0].size(), config.hidden, classes, config.seed);
    AdamState adam(model.param_count(), config.adam);
    Rng rng = Rng(config.seed).fork(1);

    const std::size_t n = features.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const std::size_t batch_size = std::max<std::size_t>(1, std::min(config.batch_size, n));

    std::vector<double> grad;
    std::vector<std::size_t> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() +
                             static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
            const double loss = mlp_loss_and_grad(model, features, labels, batch, grad);
            if (!std::isfinite(loss)) throw DivergedLoss(static_cast<std::size_t>(epoch));
            adam.update(model.params, grad);
        }
    }
    return model;
}

} // namespace elevleak::models
