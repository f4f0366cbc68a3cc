#pragma once

#include <cstddef>
#include <vector>

namespace elevleak::models {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators shaped like the parameter vector.
struct AdamState {
    AdamConfig config;
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;

    explicit AdamState(std::size_t n_params, AdamConfig cfg = {})
        : config(cfg), m(n_params, 0.0), v(n_params, 0.0) {}

    void update(std::vector<double>& params, const std::vector<double>& grad);
};

} // namespace elevleak::models
