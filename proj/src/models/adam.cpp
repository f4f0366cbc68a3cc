#include "elevleak/models/adam.hpp"

#include "elevleak/errors.hpp"

#include <cmath>

namespace elevleak::models {

void AdamState::update(std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() != m.size() || grad.size() != m.size())
        throw ShapeMismatch("adam state does not match parameter vector");
    ++step;
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        params[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
}

} // namespace elevleak::models
