#include "elevleak/models/linear_svm.hpp"

#include "elevleak/errors.hpp"

#include <algorithm>
#include <cmath>

namespace elevleak::models {

namespace {

int class_count(const std::vector<int>& labels) {
    int classes = 0;
    for (int y : labels) classes = std::max(classes, y + 1);
    bool multi = false;
    for (int y : labels)
        if (y != labels.front()) multi = true;
    if (labels.empty() || !multi) throw SingleClassDataset();
    return classes;
}

} // namespace

double LinearModel::score(int cls, const std::vector<double>& x) const {
    const double* w = weights.data() + static_cast<std::size_t>(cls) * dim;
    double s = bias[static_cast<std::size_t>(cls)];
    for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[j];
    return s;
}

int LinearModel::predict(const std::vector<double>& x) const {
    int best = 0;
    double best_score = score(0, x);
    for (int k = 1; k < classes; ++k) {
        const double s = score(k, x);
        if (s > best_score) {
            best_score = s;
            best = k;
        }
    }
    return best;
}

double svm_objective(const LinearModel& model, const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, double regularization) {
    const std::size_t n = features.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < model.classes; ++k) {
            const double target = labels[i] == k ? 1.0 : -1.0;
            loss += std::max(0.0, 1.0 - target * model.score(k, features[i]));
        }
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double w : model.weights) reg += w * w;
    return loss + 0.5 * regularization * reg;
}

LinearModel train_svm(const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels, const SvmConfig& config) {
    if (features.size() != labels.size()) throw LengthMismatch(features.size(), labels.size());
    const int classes = class_count(labels);
    const std::size_t n = features.size();
    const std::size_t dim = features[0].size();
    for (const auto& x : features)
        if (x.size() != dim) throw ShapeMismatch("inconsistent feature dimensions");

    LinearModel model;
    model.dim = dim;
    model.classes = classes;
    model.weights.assign(static_cast<std::size_t>(classes) * dim, 0.0);
    model.bias.assign(static_cast<std::size_t>(classes), 0.0);

    std::vector<double> grad_w(model.weights.size());
    std::vector<double> grad_b(model.bias.size());
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < classes; ++k) {
                const double target = labels[i] == k ? 1.0 : -1.0;
                if (target * model.score(k, features[i]) >= 1.0) continue;
                double* gw = grad_w.data() + static_cast<std::size_t>(k) * dim;
                const auto& x = features[i];
                for (std::size_t j = 0; j < dim; ++j) gw[j] -= target * x[j] * inv_n;
                grad_b[static_cast<std::size_t>(k)] -= target * inv_n;
            }
        }
        for (std::size_t j = 0; j < model.weights.size(); ++j)
            model.weights[j] -= config.lr * (grad_w[j] + config.regularization * model.weights[j]);
        for (std::size_t k = 0; k < model.bias.size(); ++k)
            model.bias[k] -= config.lr * grad_b[k];
    }
    return model;
}

} // namespace elevleak::models
