#pragma once

#include <cstddef>
#include <vector>

namespace elevleak::models {

// One-vs-rest linear scorer: argmax over per-class hyperplanes.
struct LinearModel {
    std::size_t dim = 0;
    int classes = 0;
    std::vector<double> weights; // [classes][dim], row-major
    std::vector<double> bias;    // [classes]

    double score(int cls, const std::vector<double>& x) const;
    int predict(const std::vector<double>& x) const;
};

struct SvmConfig {
    int epochs = 200;
    double lr = 0.01;
    double regularization = 1e-4;
};

// Full-batch subgradient descent on the one-vs-rest hinge objective from a
// zero initialization; deterministic by construction.
LinearModel train_svm(const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels, const SvmConfig& config = {});

// (1/N) sum_i sum_k hinge + (reg/2) sum_k ||w_k||^2. Exposed so tests can
// compare against the zero model.
double svm_objective(const LinearModel& model, const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, double regularization);

} // namespace elevleak::models
